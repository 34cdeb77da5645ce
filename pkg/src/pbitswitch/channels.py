"""Quantum channels stored as Choi matrices.

The Choi matrix of a channel ``N`` with input ``A`` and output ``B`` is
``J = sum_ij N(|i><j|) (x) |i><j|`` with the output factors first and the
input factors last. It has trace ``dim(A)``; :func:`choi_state` divides that
out.
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence, Union

import numpy as np

from . import linalg
from .errors import DimensionCapError, LayoutError, PreconditionError
from .linalg import DensityMatrix, Operator, SystemLayout

DEFAULT_DIM_CAP = 4096
TP_TOL = 1e-9
PROB_TOL = 1e-12
FORMAT_VERSION = 1

LayoutLike = Union[int, SystemLayout]


def check_dim_cap(dim: int, dim_cap: int | None, what: str = "channel Choi matrix"):
    cap = DEFAULT_DIM_CAP if dim_cap is None else dim_cap
    if dim > cap:
        raise DimensionCapError(dim, cap, what)


@dataclass(frozen=True, eq=False)
class QuantumChannel:
    in_layout: SystemLayout
    out_layout: SystemLayout
    choi: np.ndarray

    def __post_init__(self):
        choi = np.array(self.choi, dtype=complex)
        n = self.out_layout.total_dim * self.in_layout.total_dim
        if choi.shape != (n, n):
            raise LayoutError(f"Choi shape {choi.shape}, expected {(n, n)}")
        choi.flags.writeable = False
        object.__setattr__(self, "choi", choi)

    @classmethod
    def from_choi(cls, in_layout, out_layout, choi, dim_cap=None, validate=True):
        in_layout = _layout(in_layout, "A")
        out_layout = _layout(out_layout, "B")
        check_dim_cap(in_layout.total_dim * out_layout.total_dim, dim_cap)
        ch = cls(in_layout, out_layout, choi)
        if validate:
            ch.validate()
        return ch

    @property
    def d_in(self) -> int:
        return self.in_layout.total_dim

    @property
    def d_out(self) -> int:
        return self.out_layout.total_dim

    @property
    def choi_layout(self) -> SystemLayout:
        """Output factors then input factors; colliding input labels get ``_in``."""
        outs = set(self.out_layout.labels)
        ins = self.in_layout.relabel(lambda lab: f"{lab}_in" if lab in outs else lab)
        return self.out_layout + ins

    def choi_tensor(self) -> np.ndarray:
        return self.choi.reshape(self.d_out, self.d_in, self.d_out, self.d_in)

    def min_choi_eigenvalue(self) -> float:
        return float(np.linalg.eigvalsh((self.choi + self.choi.conj().T) / 2)[0])

    def trace_preservation_error(self) -> float:
        reduced = np.einsum("aiaj->ij", self.choi_tensor())
        return float(np.max(np.abs(reduced - np.eye(self.d_in))))

    def validate(self, psd_tol: float = linalg.PSD_TOL, tp_tol: float = TP_TOL):
        drift = float(np.max(np.abs(self.choi - self.choi.conj().T)))
        if drift > linalg.SYMMETRIZE_TOL:
            raise PreconditionError(f"Choi matrix not Hermitian (drift {drift:.3g})")
        lo = self.min_choi_eigenvalue()
        if lo < -psd_tol:
            raise PreconditionError(f"Choi matrix not PSD (min eigenvalue {lo:.3g})")
        err = self.trace_preservation_error()
        if err > tp_tol:
            raise PreconditionError(f"channel not trace preserving (error {err:.3g})")

    def relabel(self, mapping) -> "QuantumChannel":
        return QuantumChannel(
            self.in_layout.relabel(mapping), self.out_layout.relabel(mapping), self.choi
        )

    def kraus(self, tol: float = 1e-12) -> np.ndarray:
        """Kraus operators stacked as ``(count, d_out, d_in)``."""
        w, v = np.linalg.eigh((self.choi + self.choi.conj().T) / 2)
        keep = w > tol * max(1.0, float(w[-1]))
        vecs = v[:, keep] * np.sqrt(w[keep])
        return vecs.T.reshape(-1, self.d_out, self.d_in)


def _layout(spec: LayoutLike, label: str) -> SystemLayout:
    if isinstance(spec, SystemLayout):
        return spec
    if isinstance(spec, (int, np.integer)):
        if spec < 1:
            raise ValueError(f"dimension must be >= 1, got {spec}")
        return SystemLayout.of((label, int(spec)))
    return SystemLayout(tuple(spec))


def _io_layouts(d: LayoutLike, out_layout, out_label="B"):
    in_layout = _layout(d, "A")
    if out_layout is None:
        if isinstance(d, SystemLayout):
            out_layout = in_layout
        else:
            out_layout = SystemLayout.of((out_label, in_layout.total_dim))
    out_layout = _layout(out_layout, out_label)
    return in_layout, out_layout


def identity_channel(d: LayoutLike, out_layout=None) -> QuantumChannel:
    in_layout, out_layout = _io_layouts(d, out_layout)
    if out_layout.total_dim != in_layout.total_dim:
        raise LayoutError("identity channel needs equal input and output dimension")
    v = np.eye(in_layout.total_dim, dtype=complex).reshape(-1)
    return QuantumChannel(in_layout, out_layout, np.outer(v, v.conj()))


def total_erasure_channel(d: LayoutLike, out_layout=None, flag: str = "F") -> QuantumChannel:
    """Maps every input to ``|1><1|_F (x) mu_B``."""
    in_layout, out_layout = _io_layouts(d, out_layout)
    flag_state = np.diag([0.0, 1.0]).astype(complex)
    mu = np.eye(out_layout.total_dim) / out_layout.total_dim
    choi = np.kron(np.kron(flag_state, mu), np.eye(in_layout.total_dim))
    return QuantumChannel(in_layout, SystemLayout.of((flag, 2)) + out_layout, choi)


def erasure_channel(p: float, d: LayoutLike, out_layout=None, flag: str = "F") -> QuantumChannel:
    """``(1-p)|0><0|_F (x) id + p |1><1|_F (x) mu``."""
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"erasure probability {p} outside [0, 1]")
    in_layout, out_layout = _io_layouts(d, out_layout)
    ident = identity_channel(in_layout, out_layout)
    dim = out_layout.total_dim
    total = QuantumChannel(
        in_layout, out_layout, np.kron(np.eye(dim) / dim, np.eye(in_layout.total_dim))
    )
    return flagged_channel([(1.0 - p, ident), (p, total)], flag=flag)


def depolarizing_channel(d: LayoutLike, out_layout=None) -> QuantumChannel:
    in_layout, out_layout = _io_layouts(d, out_layout)
    n = in_layout.total_dim * out_layout.total_dim
    return QuantumChannel(in_layout, out_layout, np.eye(n) / out_layout.total_dim)


def random_channel(d_in: LayoutLike, d_out: LayoutLike, rng: np.random.Generator,
                   kraus_count: int | None = None) -> QuantumChannel:
    """Channel from a random Stinespring isometry ``C^d_in -> C^d_out (x) C^k``."""
    in_layout = _layout(d_in, "A")
    out_layout = _layout(d_out, "B")
    di, do = in_layout.total_dim, out_layout.total_dim
    k = kraus_count or di * do
    z = rng.standard_normal((do * k, di)) + 1j * rng.standard_normal((do * k, di))
    v, _ = np.linalg.qr(z)
    kraus = v.reshape(do, k, di).transpose(1, 0, 2)
    vecs = kraus.reshape(k, -1)
    return QuantumChannel(in_layout, out_layout, vecs.T @ vecs.conj())


def _split_input(channel: QuantumChannel, rho: Operator):
    """Positions of the channel input inside ``rho`` and the reference positions."""
    labels = rho.layout.labels
    in_labels = channel.in_layout.labels
    if all(lab in labels for lab in in_labels):
        pos = [labels.index(lab) for lab in in_labels]
        dims = tuple(rho.layout.dims[i] for i in pos)
        if dims != channel.in_layout.dims:
            raise LayoutError(f"input dims {dims} do not match {channel.in_layout.dims}")
    elif rho.layout.dims == channel.in_layout.dims:
        pos = list(range(len(rho.layout)))
    else:
        raise LayoutError(
            f"state layout {rho.layout.factors} does not contain channel input "
            f"{channel.in_layout.factors}"
        )
    refs = [i for i in range(len(rho.layout)) if i not in pos]
    return pos, refs


def apply(channel: QuantumChannel, rho: Operator) -> Operator:
    """Apply ``channel`` to its input factors of ``rho``; other factors are untouched.

    The output layout is the channel output followed by the untouched factors
    in their original order.
    """
    pos, refs = _split_input(channel, rho)
    ref_layout = rho.layout.select(refs)
    out_layout = channel.out_layout + ref_layout
    arranged = linalg.permute(rho, pos + refs)
    di, dr, do = channel.d_in, ref_layout.total_dim, channel.d_out
    x = arranged.matrix.reshape(di, dr, di, dr)
    out = np.einsum("aibj,irjs->arbs", channel.choi_tensor(), x, optimize=True)
    n = do * dr
    mat = out.reshape(n, n)
    if isinstance(rho, DensityMatrix):
        return DensityMatrix._trusted(out_layout, (mat + mat.conj().T) / 2)
    return Operator._trusted(out_layout, mat)


def compose(second: QuantumChannel, first: QuantumChannel) -> QuantumChannel:
    """The channel ``second o first``."""
    if first.out_layout.dims != second.in_layout.dims:
        raise LayoutError(
            f"cannot compose: output dims {first.out_layout.dims} vs input dims "
            f"{second.in_layout.dims}"
        )
    j = np.einsum(
        "ambn,minj->aibj", second.choi_tensor(), first.choi_tensor(), optimize=True
    )
    n = second.d_out * first.d_in
    return QuantumChannel(first.in_layout, second.out_layout, j.reshape(n, n))


def _kron_choi(a: QuantumChannel, b: QuantumChannel) -> np.ndarray:
    ja = a.choi_tensor()
    jb = b.choi_tensor()
    j = np.einsum("aibj,ckdl->acikbdjl", ja, jb)
    n = a.d_out * b.d_out * a.d_in * b.d_in
    return j.reshape(n, n)


def tensor_channels(a: QuantumChannel, b: QuantumChannel, dim_cap=None) -> QuantumChannel:
    in_layout = a.in_layout + b.in_layout
    out_layout = a.out_layout + b.out_layout
    check_dim_cap(in_layout.total_dim * out_layout.total_dim, dim_cap)
    return QuantumChannel(in_layout, out_layout, _kron_choi(a, b))


def _same_io(channels: Sequence[QuantumChannel]):
    first = channels[0]
    for ch in channels[1:]:
        if ch.in_layout.dims != first.in_layout.dims or ch.out_layout.dims != first.out_layout.dims:
            raise LayoutError("branch channels must share input and output layouts")


def flagged_channel(branches: Sequence[tuple[float, QuantumChannel]], flag: str = "F") -> QuantumChannel:
    """``sum_i p_i |i><i|_F (x) N_i``; the flag becomes the first output factor."""
    probs = np.array([p for p, _ in branches], dtype=float)
    chans = [ch for _, ch in branches]
    if np.any(probs < 0) or abs(probs.sum() - 1.0) > PROB_TOL:
        raise ValueError(f"branch probabilities {probs.tolist()} must be >= 0 and sum to 1")
    _same_io(chans)
    k = len(chans)
    base = chans[0]
    choi = sum(
        np.kron(np.diag(np.eye(k)[i]), p * ch.choi) for i, (p, ch) in enumerate(zip(probs, chans))
    )
    return QuantumChannel(
        base.in_layout, SystemLayout.of((flag, k)) + base.out_layout, choi
    )


def switched_channel(branches: Sequence[QuantumChannel], switch: str = "S") -> QuantumChannel:
    """``sum_i P_i (x) N_i`` with a dephased switch kept in the output."""
    _same_io(branches)
    k = len(branches)
    base = branches[0]
    in_layout = SystemLayout.of((switch, k)) + base.in_layout
    out_layout = SystemLayout.of((switch, k)) + base.out_layout
    do, di = base.d_out, base.d_in
    j = np.zeros((k, do, k, di, k, do, k, di), dtype=complex)
    for i, ch in enumerate(branches):
        j[i, :, i, :, i, :, i, :] = ch.choi_tensor()
    n = k * do * k * di
    return QuantumChannel(in_layout, out_layout, j.reshape(n, n))


def choi_state(channel: QuantumChannel) -> DensityMatrix:
    mat = channel.choi / channel.d_in
    return DensityMatrix._trusted(channel.choi_layout, (mat + mat.conj().T) / 2)


def channel_from_choi_state(
    state: Operator,
    in_factors: Sequence[Union[str, int]],
    out_factors: Sequence[Union[str, int]],
    dim_cap=None,
    tp_tol: float = TP_TOL,
) -> QuantumChannel:
    """The channel whose Choi state is ``state``.

    ``in_factors`` and ``out_factors`` must partition the state's factors; the
    reduced state on ``in_factors`` has to be maximally mixed.
    """
    layout = state.layout
    ins = layout.indices(in_factors)
    outs = layout.indices(out_factors)
    if sorted(ins + outs) != list(range(len(layout))):
        raise LayoutError("input and output factors must partition the state")
    in_layout = layout.select(ins)
    out_layout = layout.select(outs)
    check_dim_cap(layout.total_dim, dim_cap)
    reduced = linalg.keep_only(state, ins)
    d_in = in_layout.total_dim
    err = float(np.max(np.abs(reduced.matrix - np.eye(d_in) / d_in)))
    if err > tp_tol:
        raise PreconditionError(
            f"reduced state on input factors is not maximally mixed (error {err:.3g})"
        )
    arranged = linalg.permute(state, outs + ins)
    return QuantumChannel(in_layout, out_layout, arranged.matrix * d_in)


# -- serialization -----------------------------------------------------------


def _encode_matrix(mat: np.ndarray) -> dict:
    flat = np.asarray(mat, dtype=complex).reshape(-1)
    return {
        "dim": int(mat.shape[0]),
        "entries": [[float(z.real), float(z.imag)] for z in flat],
    }


def _decode_matrix(doc: dict) -> np.ndarray:
    dim = int(doc["dim"])
    arr = np.array(doc["entries"], dtype=float)
    if arr.shape != (dim * dim, 2):
        raise LayoutError(f"matrix payload has shape {arr.shape}, expected {(dim * dim, 2)}")
    return (arr[:, 0] + 1j * arr[:, 1]).reshape(dim, dim)


def channel_to_json(channel: QuantumChannel) -> dict:
    return {
        "version": FORMAT_VERSION,
        "kind": "channel",
        "in_layout": channel.in_layout.to_json(),
        "out_layout": channel.out_layout.to_json(),
        "choi": _encode_matrix(channel.choi),
    }


def channel_from_json(doc: dict, dim_cap=None, validate=True) -> QuantumChannel:
    if doc.get("version") != FORMAT_VERSION:
        raise ValueError(f"unsupported format version {doc.get('version')}")
    return QuantumChannel.from_choi(
        SystemLayout.from_json(doc["in_layout"]),
        SystemLayout.from_json(doc["out_layout"]),
        _decode_matrix(doc["choi"]),
        dim_cap=dim_cap,
        validate=validate,
    )


def state_to_json(state: Operator) -> dict:
    return {
        "version": FORMAT_VERSION,
        "kind": "state",
        "layout": state.layout.to_json(),
        "matrix": _encode_matrix(state.matrix),
    }


def state_from_json(doc: dict) -> DensityMatrix:
    if doc.get("version") != FORMAT_VERSION:
        raise ValueError(f"unsupported format version {doc.get('version')}")
    layout = SystemLayout.from_json(doc["layout"])
    return DensityMatrix(layout, _decode_matrix(doc["matrix"]))


def dumps(obj: Union[QuantumChannel, Operator]) -> str:
    doc = channel_to_json(obj) if isinstance(obj, QuantumChannel) else state_to_json(obj)
    return json.dumps(doc)


def save(obj: Union[QuantumChannel, Operator], path) -> None:
    Path(path).write_text(dumps(obj))


def load(path, dim_cap=None) -> Union[QuantumChannel, DensityMatrix]:
    doc = json.loads(Path(path).read_text())
    if doc.get("kind") == "state" or "layout" in doc:
        return state_from_json(doc)
    return channel_from_json(doc, dim_cap=dim_cap)
