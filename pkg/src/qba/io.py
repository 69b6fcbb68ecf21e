"""Channel file reader.

A channel file is a JSON document with exactly one of the keys

``kraus``
    list of Kraus matrices (``dim_out`` rows of ``dim_in`` entries);
``cq``
    list of output density matrices;
``stochastic``
    column-stochastic matrix ``Q[y][x] = P(y|x)``;

plus optional ``dims`` (``{"in": .., "out": ..}``) checked against the data,
and optional ``gibbs`` holding either ``gamma_A``/``gamma_B`` matrices or
``H_A``/``H_B`` Hamiltonians with ``beta`` (a number or ``"inf"``).

Matrix entries are real numbers or ``[re, im]`` pairs.
"""

import json
import math

import numpy as np

from .channels import CqChannel, KrausChannel, check_stochastic, completeness_residual
from .errors import InvalidParameter, QBAError, ValidationError
from .states import GibbsSpec

FILE_TOL = 1e-8
CHANNEL_KEYS = ("kraus", "cq", "stochastic")


def load_document(path):
    with open(path, encoding="utf-8") as fh:
        text = fh.read()
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ValidationError(
            f"{path}: line {exc.lineno}, column {exc.colno}: {exc.msg}", invariant="syntax"
        ) from None
    if not isinstance(doc, dict):
        raise ValidationError(f"{path}: top level must be an object", invariant="syntax")
    return doc


def _entry(value, where):
    if isinstance(value, bool):
        raise ValidationError(f"{where}: expected a number, got {value!r}", invariant="syntax")
    if isinstance(value, (int, float)):
        return complex(value)
    if isinstance(value, list) and len(value) == 2 and all(
        isinstance(v, (int, float)) and not isinstance(v, bool) for v in value
    ):
        return complex(value[0], value[1])
    raise ValidationError(
        f"{where}: expected a number or [re, im] pair, got {value!r}", invariant="syntax"
    )


def parse_matrix(value, where):
    if not isinstance(value, list) or not value or not all(isinstance(r, list) for r in value):
        raise ValidationError(f"{where}: expected a non-empty list of rows", invariant="syntax")
    width = len(value[0])
    rows = []
    for i, row in enumerate(value):
        if len(row) != width:
            raise ValidationError(
                f"{where}[{i}]: row has {len(row)} entries, expected {width}", invariant="shape"
            )
        rows.append([_entry(v, f"{where}[{i}][{j}]") for j, v in enumerate(row)])
    m = np.array(rows, dtype=complex)
    if not np.all(np.isfinite(m)):
        raise ValidationError(f"{where}: non-finite entry", invariant="finite")
    return m


def _check_dims(doc, dim_in, dim_out):
    dims = doc.get("dims")
    if dims is None:
        return
    if not isinstance(dims, dict):
        raise ValidationError("dims: expected an object with 'in' and 'out'", invariant="syntax")
    for key, actual in (("in", dim_in), ("out", dim_out)):
        if key in dims and dims[key] != actual:
            raise ValidationError(
                f"dims.{key}: declared {dims[key]!r} but data has {actual}", invariant="dims"
            )


def _parse_kraus(doc):
    raw = doc["kraus"]
    if not isinstance(raw, list) or not raw:
        raise ValidationError("kraus: expected a non-empty list of matrices", invariant="syntax")
    ops = [parse_matrix(m, f"kraus[{k}]") for k, m in enumerate(raw)]
    shapes = {op.shape for op in ops}
    if len(shapes) != 1:
        raise ValidationError(f"kraus: operators have differing shapes {sorted(shapes)}", invariant="shape")
    resid = completeness_residual(np.stack(ops), ord=2)
    if resid > FILE_TOL:
        raise ValidationError(
            f"kraus: completeness residual {resid:.6g} (sum_k A_k^dagger A_k must be the identity)",
            invariant="completeness",
            residual=resid,
        )
    ch = KrausChannel(ops, atol=10 * FILE_TOL)
    _check_dims(doc, ch.dim_in, ch.dim_out)
    return ch


def _parse_cq(doc):
    raw = doc["cq"]
    if not isinstance(raw, list) or not raw:
        raise ValidationError("cq: expected a non-empty list of density matrices", invariant="syntax")
    outs = []
    for i, m in enumerate(raw):
        where = f"cq[{i}]"
        t = parse_matrix(m, where)
        if t.shape[0] != t.shape[1]:
            raise ValidationError(f"{where}: density matrix must be square, got {t.shape}", invariant="shape")
        asym = float(np.linalg.norm(t - t.conj().T))
        if asym > FILE_TOL:
            raise ValidationError(f"{where}: not Hermitian (residual {asym:.6g})", invariant="hermitian", residual=asym)
        t = 0.5 * (t + t.conj().T)
        tr = float(np.trace(t).real)
        if abs(tr - 1.0) > FILE_TOL:
            raise ValidationError(
                f"{where}: trace {tr:.12g} (density operator must have unit trace)",
                invariant="trace",
                residual=abs(tr - 1.0),
            )
        low = float(np.linalg.eigvalsh(t)[0])
        if low < -FILE_TOL:
            raise ValidationError(
                f"{where}: negative eigenvalue {low:.6g} (density operator must be PSD)",
                invariant="psd",
                residual=-low,
            )
        outs.append(t / tr)
    try:
        ch = CqChannel(outs, atol=FILE_TOL)
    except QBAError as exc:
        raise ValidationError(f"cq: {exc}", invariant="dims") from None
    _check_dims(doc, ch.dim_in, ch.dim_out)
    return ch


def _parse_stochastic(doc):
    q = parse_matrix(doc["stochastic"], "stochastic")
    if np.abs(q.imag).max() > 0:
        raise ValidationError("stochastic: entries must be real", invariant="real")
    q = q.real
    resid = float(np.max(np.abs(q.sum(axis=0) - 1.0)))
    if resid > FILE_TOL or q.min() < -FILE_TOL:
        raise ValidationError(
            f"stochastic: columns must be probability vectors (column-sum residual {resid:.6g}, min entry {q.min():.6g})",
            invariant="stochastic",
            residual=resid,
        )
    q = check_stochastic(q, atol=FILE_TOL)
    _check_dims(doc, q.shape[1], q.shape[0])
    return q


def parse_channel_document(doc):
    present = [k for k in CHANNEL_KEYS if k in doc]
    if len(present) != 1:
        raise ValidationError(
            f"channel file needs exactly one of {', '.join(CHANNEL_KEYS)}; found {present or 'none'}",
            invariant="syntax",
        )
    kind = present[0]
    if kind == "kraus":
        return _parse_kraus(doc)
    if kind == "cq":
        return _parse_cq(doc)
    return _parse_stochastic(doc)


def parse_channel_file(path):
    """Read a channel file into a KrausChannel, CqChannel or stochastic matrix."""
    return parse_channel_document(load_document(path))


def parse_gibbs(doc, dim_a, dim_b):
    """Gibbs operators from a document's ``gibbs`` entry, or ``None`` if absent."""
    g = doc.get("gibbs")
    if g is None:
        return None
    if not isinstance(g, dict):
        raise ValidationError("gibbs: expected an object", invariant="syntax")
    try:
        if "gamma_A" in g or "gamma_B" in g:
            spec = GibbsSpec(parse_matrix(g["gamma_A"], "gibbs.gamma_A"), parse_matrix(g["gamma_B"], "gibbs.gamma_B"))
        else:
            beta = g.get("beta", "inf")
            beta = math.inf if beta in ("inf", "Infinity") else float(beta)
            spec = GibbsSpec.from_hamiltonians(
                parse_matrix(g["H_A"], "gibbs.H_A"), parse_matrix(g["H_B"], "gibbs.H_B"), beta
            )
    except KeyError as exc:
        raise ValidationError(f"gibbs: missing field {exc.args[0]}", invariant="syntax") from None
    except (InvalidParameter, ValueError) as exc:
        if isinstance(exc, ValidationError):
            raise
        raise ValidationError(f"gibbs: {exc}", invariant="gibbs") from None
    if spec.gamma_A.shape[0] != dim_a or spec.gamma_B.shape[0] != dim_b:
        raise ValidationError(
            f"gibbs: operator dims ({spec.gamma_A.shape[0]}, {spec.gamma_B.shape[0]}) do not match channel ({dim_a}, {dim_b})",
            invariant="dims",
        )
    return spec


def _matrix_to_json(m):
    m = np.asarray(m)
    if np.iscomplexobj(m) and np.abs(m.imag).max() > 0:
        return [[[float(v.real), float(v.imag)] for v in row] for row in m]
    return [[float(v) for v in row] for row in np.real(m)]


def channel_document(ch):
    """Serialize a channel (or stochastic matrix) back into the file layout."""
    if isinstance(ch, KrausChannel):
        return {
            "dims": {"in": ch.dim_in, "out": ch.dim_out},
            "kraus": [_matrix_to_json(a) for a in ch.kraus_ops],
        }
    if isinstance(ch, CqChannel):
        return {"dims": {"in": ch.dim_in, "out": ch.dim_out}, "cq": [_matrix_to_json(t) for t in ch.outputs]}
    q = np.asarray(ch, dtype=float)
    return {"dims": {"in": q.shape[1], "out": q.shape[0]}, "stochastic": _matrix_to_json(q)}


def write_channel_file(ch, path):
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(channel_document(ch), fh, indent=1)
        fh.write("\n")
