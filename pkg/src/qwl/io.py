"""JSON formats for maps, weight families, q-weight specs and reports.

Complex numbers are [re, im] pairs, matrices are row-major lists of rows and
every float is written with 17 significant digits, so files round-trip
exactly and identical inputs give byte-identical output.
"""

import json
import math

import numpy as np

from .bweight import DIVERGENT, Atom, WeightFamily, is_divergent
from .condform import CanonicalForm
from .errors import ParseError, QwlError
from .qweight import QWeightSpec
from .superop import SuperOperator


# ------------------------------------------------------------------ writing

def _fmt_float(x):
    x = float(x)
    if math.isnan(x):
        return '"nan"'
    if math.isinf(x):
        return '"inf"' if x > 0 else '"-inf"'
    text = format(x, ".17g")
    return text if any(c in text for c in ".e") else text + ".0"


def to_plain(obj):
    """Convert numpy data and library objects into JSON-ready structures."""
    if is_divergent(obj):
        return "Divergent"
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        return float(obj)
    if isinstance(obj, (complex, np.complexfloating)):
        return [float(obj.real), float(obj.imag)]
    if isinstance(obj, np.ndarray):
        return to_plain(obj.tolist())
    if isinstance(obj, dict):
        return {str(k): to_plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_plain(v) for v in obj]
    if isinstance(obj, SuperOperator):
        return superop_to_json(obj)
    if obj is None or isinstance(obj, str):
        return obj
    if hasattr(obj, "value") and isinstance(getattr(obj, "value"), str):
        return obj.value
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def _write(obj, out, indent, level):
    pad = " " * (indent * (level + 1))
    end = " " * (indent * level)
    if isinstance(obj, dict):
        if not obj:
            out.append("{}")
            return
        out.append("{\n")
        keys = sorted(obj)
        for n, k in enumerate(keys):
            out.append(pad + json.dumps(k) + ": ")
            _write(obj[k], out, indent, level + 1)
            out.append(",\n" if n + 1 < len(keys) else "\n")
        out.append(end + "}")
    elif isinstance(obj, list):
        if not obj:
            out.append("[]")
            return
        flat = all(not isinstance(v, (dict, list)) for v in obj) or all(
            isinstance(v, list) and all(not isinstance(w, (dict, list)) for w in v) for v in obj)
        if flat:
            out.append("[")
            for n, v in enumerate(obj):
                _write(v, out, indent, level + 1)
                if n + 1 < len(obj):
                    out.append(", ")
            out.append("]")
            return
        out.append("[\n")
        for n, v in enumerate(obj):
            out.append(pad)
            _write(v, out, indent, level + 1)
            out.append(",\n" if n + 1 < len(obj) else "\n")
        out.append(end + "]")
    elif isinstance(obj, bool) or obj is None:
        out.append(json.dumps(obj))
    elif isinstance(obj, int):
        out.append(str(obj))
    elif isinstance(obj, float):
        out.append(_fmt_float(obj))
    else:
        out.append(json.dumps(obj))


def dumps(obj, indent=2):
    out = []
    _write(to_plain(obj), out, indent, 0)
    return "".join(out) + "\n"


def matrix_to_json(A):
    A = np.asarray(A, dtype=complex)
    return [[[float(z.real), float(z.imag)] for z in row] for row in A]


def vector_to_json(v):
    return [[float(z.real), float(z.imag)] for z in np.asarray(v, dtype=complex).ravel()]


def superop_to_json(phi):
    return {"kind": "superoperator", "dim_in": phi.dim_in, "dim_out": phi.dim_out,
            "action": matrix_to_json(phi.action)}


def atom_to_json(at):
    return {"alpha": float(at.alpha), "a": float(at.a), "coef": vector_to_json(at.coef)}


def weights_to_json(W):
    return {
        "p": W.p, "q": W.q, "m": W.m,
        "lift": [matrix_to_json(L) for L in W.lift],
        "units": [[matrix_to_json(E) for E in row] for row in W.units()],
        "g": [[atom_to_json(at) for at in atoms] for atoms in W.g],
        "h": [[[atom_to_json(at) for at in comp] for comp in row] for row in W.h],
    }


def spec_to_json(spec):
    d = {"kind": "qweight", "p": spec.p, "q": spec.q, "m": spec.m,
         "psi": superop_to_json(spec.psi), "weights": weights_to_json(spec.weights)}
    if spec.eta is not None:
        d["eta"] = weights_to_json(spec.eta)
    return d


# ------------------------------------------------------------------ reading

def _complex(x, where):
    if isinstance(x, (int, float)) and not isinstance(x, bool):
        return complex(x)
    if isinstance(x, list) and len(x) == 2 and all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in x):
        return complex(x[0], x[1])
    raise ParseError(f"expected a number or [re, im] pair, got {json.dumps(x)[:40]}", where)


def parse_vector(x, where):
    if not isinstance(x, list):
        raise ParseError("expected a list of complex entries", where)
    return np.array([_complex(v, f"{where}[{i}]") for i, v in enumerate(x)], dtype=complex)


def parse_matrix(x, where, square=False):
    if not isinstance(x, list) or not x or not all(isinstance(r, list) for r in x):
        raise ParseError("expected a non-empty list of rows", where)
    rows = [parse_vector(r, f"{where}[{i}]") for i, r in enumerate(x)]
    n = len(rows[0])
    if any(len(r) != n for r in rows):
        raise ParseError("rows have different lengths", where)
    M = np.array(rows, dtype=complex)
    if square and M.shape[0] != M.shape[1]:
        raise ParseError(f"matrix must be square, got shape {M.shape[0]}x{M.shape[1]}", where)
    return M


def _req(d, key, where):
    if not isinstance(d, dict):
        raise ParseError("expected an object", where)
    if key not in d:
        raise ParseError(f"missing field {key!r}", where)
    return d[key]


def _int(d, key, where):
    v = _req(d, key, where)
    if not isinstance(v, int) or isinstance(v, bool) or v < 1:
        raise ParseError(f"{key} must be a positive integer", f"{where}.{key}")
    return v


def _float(d, key, where):
    v = _req(d, key, where)
    if not isinstance(v, (int, float)) or isinstance(v, bool):
        raise ParseError(f"{key} must be a number", f"{where}.{key}")
    return float(v)


def parse_superop(d, where="$"):
    if not isinstance(d, dict):
        raise ParseError("expected a superoperator object", where)
    if "action" in d:
        M = parse_matrix(d["action"], f"{where}.action")
        try:
            return SuperOperator(M, d.get("dim_in"), d.get("dim_out"))
        except QwlError as e:
            raise ParseError(str(e), f"{where}.action") from e
    if "choi" in d:
        C = parse_matrix(d["choi"], f"{where}.choi", square=True)
        din = d.get("dim_in") or int(round(math.sqrt(C.shape[0])))
        dout = d.get("dim_out") or C.shape[0] // din
        if din * dout != C.shape[0]:
            raise ParseError("choi size does not match dim_in * dim_out", f"{where}.choi")
        return SuperOperator.from_choi(C, din, dout)
    if "kraus" in d:
        ops = [parse_matrix(K, f"{where}.kraus[{i}]") for i, K in enumerate(_req(d, "kraus", where))]
        if not ops or any(K.shape != ops[0].shape for K in ops):
            raise ParseError("Kraus operators must share one shape", f"{where}.kraus")
        w = d.get("weights")
        return SuperOperator.from_kraus(ops, None if w is None else [float(v) for v in w])
    if "canonical" in d:
        return parse_canonical(d["canonical"], f"{where}.canonical").reassemble()
    raise ParseError("superoperator needs one of action, choi, kraus, canonical", where)


def parse_canonical(d, where="$"):
    s = _float(d, "s", where)
    Y = parse_matrix(_req(d, "Y", where), f"{where}.Y", square=True)
    lam = [float(v) for v in d.get("lambdas", [])]
    X = [parse_matrix(M, f"{where}.X[{i}]", square=True) for i, M in enumerate(d.get("X", []))]
    if len(lam) != len(X):
        raise ParseError("lambdas and X differ in length", where)
    return CanonicalForm(s, Y, np.array(lam), X, spectrum=np.array(lam))


def parse_atom(d, where, dim=None):
    alpha = _float(d, "alpha", where)
    a = _float(d, "a", where)
    coef = parse_vector(_req(d, "coef", where), f"{where}.coef")
    if dim is not None and coef.shape[0] != dim:
        raise ParseError(f"coefficient has length {coef.shape[0]}, expected {dim}", f"{where}.coef")
    if not alpha > -1.0:
        raise ParseError(f"alpha must exceed -1 (got {alpha:g})", f"{where}.alpha")
    if not a > 0.0:
        raise ParseError(f"decay a must be positive (got {a:g})", f"{where}.a")
    return Atom(alpha, a, coef)


def _lift_from_units(E, q, p, m, where):
    w, V = np.linalg.eigh(0.5 * (E[0][0] + E[0][0].conj().T))
    V1 = V[:, w > 0.5]
    if V1.shape[1] != m:
        raise ParseError(f"E_11 has rank {V1.shape[1]}, expected m = {m}", f"{where}.units")
    return np.array([E[i][0] @ V1 for i in range(q)])


def parse_weights(d, where="$"):
    p, q, m = _int(d, "p", where), _int(d, "q", where), _int(d, "m", where)
    if p < q * m:
        raise ParseError(f"need p >= q m (p={p}, q={q}, m={m})", where)
    if "lift" in d:
        lift = np.array([parse_matrix(L, f"{where}.lift[{i}]") for i, L in enumerate(d["lift"])])
        if lift.shape != (q, p, m):
            raise ParseError(f"lift has shape {lift.shape}, expected {(q, p, m)}", f"{where}.lift")
    elif "units" in d:
        rows = d["units"]
        if not isinstance(rows, list) or len(rows) != q or any(not isinstance(r, list) or len(r) != q for r in rows):
            raise ParseError(f"units must be a {q} x {q} array of matrices", f"{where}.units")
        E = [[parse_matrix(M, f"{where}.units[{i}][{j}]", square=True) for j, M in enumerate(r)] for i, r in enumerate(rows)]
        for i, r in enumerate(E):
            for j, M in enumerate(r):
                if M.shape != (p, p):
                    raise ParseError(f"unit has shape {M.shape}, expected {(p, p)}", f"{where}.units[{i}][{j}]")
        lift = _lift_from_units(E, q, p, m, where)
    else:
        lift = None
    g_raw = _req(d, "g", where)
    if not isinstance(g_raw, list):
        raise ParseError("g must be a list of atom lists", f"{where}.g")
    g = [[parse_atom(at, f"{where}.g[{k}][{n}]", m) for n, at in enumerate(atoms)] for k, atoms in enumerate(g_raw)]
    h = []
    for k, row in enumerate(d.get("h", []) or []):
        if not isinstance(row, list) or len(row) != q:
            raise ParseError(f"h[{k}] needs {q} components", f"{where}.h[{k}]")
        h.append([[parse_atom(at, f"{where}.h[{k}][{i}][{n}]", p) for n, at in enumerate(comp)]
                  for i, comp in enumerate(row)])
    if h and len(h) != len(g):
        raise ParseError("h needs one entry per g", f"{where}.h")
    if lift is None:
        return WeightFamily.standard(q, m, g, h, p)
    return WeightFamily(p, q, m, lift, g, h)


def parse_spec(d, where="$"):
    if not isinstance(d, dict) or d.get("kind", "qweight") != "qweight":
        raise ParseError("expected a q-weight spec object", where)
    W = parse_weights(_req(d, "weights", where), f"{where}.weights")
    for key in ("p", "q", "m"):
        if key in d and d[key] != getattr(W, key):
            raise ParseError(f"{key} disagrees with the weight family", f"{where}.{key}")
    psi = parse_superop(_req(d, "psi", where), f"{where}.psi")
    if psi.dim_in != W.q:
        raise ParseError(f"psi acts on M_{psi.dim_in}, expected M_{W.q}", f"{where}.psi")
    eta = parse_weights(d["eta"], f"{where}.eta") if d.get("eta") is not None else None
    return QWeightSpec(psi, W, eta)


def load_json(path):
    try:
        with open(path) as fh:
            text = fh.read()
    except OSError as e:
        raise ParseError(f"cannot read file: {e.strerror}", str(path)) from e
    try:
        return json.loads(text)
    except json.JSONDecodeError as e:
        raise ParseError(f"invalid JSON: {e.msg} at line {e.lineno} column {e.colno}", str(path)) from e


def validate_schema(path):
    """Field-level diagnostics for a spec or map file (empty list when fine)."""
    try:
        d = load_json(path)
    except ParseError as e:
        return [str(e)]
    try:
        kind = d.get("kind") if isinstance(d, dict) else None
        if kind in ("superoperator", None) and isinstance(d, dict) and any(k in d for k in ("action", "choi", "kraus", "canonical")):
            parse_superop(d)
        elif kind == "weights":
            parse_weights(d)
        elif kind == "witness":
            parse_spec(_req(d, "omega1", "$"), "$.omega1")
            parse_spec(_req(d, "omega2", "$"), "$.omega2")
            parse_matrix(_req(d, "U", "$"), "$.U")
        elif kind == "subordinate":
            parse_spec(_req(d, "omega", "$"), "$.omega")
            parse_superop(_req(d, "psi_prime", "$"), "$.psi_prime")
        else:
            parse_spec(d)
    except ParseError as e:
        return [str(e)]
    except QwlError as e:
        return [f"$: {e}"]
    except (TypeError, ValueError, AttributeError, IndexError, KeyError) as e:
        return [f"$: malformed input ({type(e).__name__}: {e})"]
    return []


__all__ = ["DIVERGENT", "dumps", "load_json", "parse_spec", "parse_superop", "parse_weights",
           "spec_to_json", "superop_to_json", "weights_to_json", "validate_schema"]
