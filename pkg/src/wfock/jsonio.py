"""JSON schemas for graphs, weight data, operators, and problems.

Complex numbers are [re, im] pairs, matrices are row-major nested lists, and
all files are plain JSON so fixtures diff cleanly.  Decoding raises ValueError
with the violated field named; the CLI maps that to an input error.
"""

from __future__ import annotations

import numpy as np

from .fock import FockOperator
from .graphs import GraphCorrespondence, path_basis
from .induced import InducedSpace, Representation
from .interpolation import DiscPoint, PickProblem
from .linalg import as_complex
from .weights import AdmissibleSequence, WeightSystem, weight_system_from


def encode_complex(z) -> list[float]:
    z = complex(z)
    return [float(z.real), float(z.imag)]


def decode_complex(v) -> complex:
    if isinstance(v, (int, float)):
        return complex(v)
    if isinstance(v, (list, tuple)) and len(v) == 2:
        return complex(float(v[0]), float(v[1]))
    raise ValueError(f"not a complex value: {v!r}")


def encode_matrix(m) -> list:
    m = as_complex(np.atleast_2d(m))
    return [[encode_complex(v) for v in row] for row in m]


def decode_matrix(rows) -> np.ndarray:
    if not isinstance(rows, list):
        raise ValueError("matrix must be a list of rows")
    return np.array([[decode_complex(v) for v in row] for row in rows], dtype=complex)


def encode_graph(g: GraphCorrespondence) -> dict:
    return {"vertices": g.n_vertices, "edges": [list(e) for e in g.edges]}


def decode_graph(obj) -> GraphCorrespondence:
    try:
        return GraphCorrespondence(int(obj["vertices"]),
                                   tuple((int(s), int(r)) for s, r in obj["edges"]))
    except (KeyError, TypeError) as exc:
        raise ValueError(f"graph: expected vertices/edges, got {obj!r}") from exc


def decode_rep(obj, graph: GraphCorrespondence) -> Representation:
    mults = obj.get("multiplicities", obj) if isinstance(obj, dict) else obj
    try:
        rep = Representation(tuple(int(m) for m in mults))
    except TypeError as exc:
        raise ValueError("sigma: expected a multiplicity list") from exc
    if rep.n_vertices != graph.n_vertices:
        raise ValueError("sigma: multiplicity count differs from the vertex count")
    return rep


def decode_x(obj, graph: GraphCorrespondence, levels: int,
             certificate: float | None = None) -> AdmissibleSequence:
    if not isinstance(obj, dict):
        raise ValueError("X: expected an object with 'scalar' or 'matrices'")
    if "scalar" in obj:
        return AdmissibleSequence.from_scalar(graph, [float(v) for v in obj["scalar"]],
                                              levels=levels, radius_certificate=certificate)
    if "matrices" in obj:
        mats = [np.zeros((graph.n_vertices,) * 2, dtype=complex)]
        for k in range(1, levels + 1):
            key = str(k)
            d = path_basis(graph, k).size
            if key in obj["matrices"]:
                mats.append(decode_matrix(obj["matrices"][key]))
            else:
                mats.append(np.zeros((d, d), dtype=complex))
        return AdmissibleSequence(graph, levels, mats, radius_certificate=certificate)
    raise ValueError("X: expected 'scalar' or 'matrices'")


def encode_x(x: AdmissibleSequence) -> dict:
    return {"matrices": {str(k): encode_matrix(x.X[k]) for k in range(1, x.levels + 1)}}


def decode_weights(obj, x: AdmissibleSequence) -> WeightSystem:
    if obj is None or obj == "canonical":
        return weight_system_from(x)
    if isinstance(obj, dict) and "matrices" in obj:
        zs = [np.eye(x.graph.n_vertices, dtype=complex)]
        for k in range(1, x.levels + 1):
            zs.append(decode_matrix(obj["matrices"][str(k)]))
        return weight_system_from(x, Z=zs)
    raise ValueError("Z: expected 'canonical' or {'matrices': ...}")


def encode_weights(ws: WeightSystem) -> dict:
    return {"matrices": {str(k): encode_matrix(ws.Z[k]) for k in range(1, ws.levels + 1)}}


def decode_point(obj, ind: InducedSpace, x: AdmissibleSequence) -> DiscPoint:
    if isinstance(obj, dict) and "scalar" in obj:
        return DiscPoint.scalar(ind, x, decode_complex(obj["scalar"]))
    if isinstance(obj, dict) and "matrix" in obj:
        return DiscPoint(ind, x, decode_matrix(obj["matrix"]))
    raise ValueError("point: expected {'scalar': z} or {'matrix': rows}")


def decode_pick_problem(obj, levels: int):
    """Parse a full interpolation problem; returns (ind, x, ws, problem)."""
    graph = decode_graph(obj["graph"])
    rep = decode_rep(obj.get("sigma", [1] * graph.n_vertices), graph)
    x = decode_x(obj["X"], graph, levels)
    ws = decode_weights(obj.get("Z"), x)
    ind = InducedSpace(graph, rep, levels)
    points = [decode_point(p, ind, x) for p in obj["points"]]
    s = int(obj.get("s", 1))
    t = int(obj.get("t", 1))
    h = rep.h_dim
    if "B" in obj:
        b_list = [decode_matrix(b) for b in obj["B"]]
    else:
        b_list = [np.eye(s * h, dtype=complex) for _ in points]
    f_list = [decode_matrix(f) for f in obj["F"]]
    return ind, x, ws, PickProblem(points, b_list, f_list, s=s, t=t)


def encode_fock_operator(op: FockOperator) -> dict:
    """Operator dump: shape, degree, and the nonzero graded blocks."""
    blocks = {}
    sp = op.space
    for i in range(sp.levels + 1):
        for j in range(sp.levels + 1):
            blk = op.block(i, j)
            if blk.size and np.abs(blk).max() > 0:
                blocks[f"{i},{j}"] = encode_matrix(blk)
    return {"shape": [op.matrix.shape[0], op.matrix.shape[1]],
            "degree": op.degree, "blocks": blocks}


def encode_basis(graph: GraphCorrespondence, k: int) -> list:
    basis = path_basis(graph, k)
    if k == 0:
        return [[v] for v in basis.sources]
    return [list(p) for p in basis.paths]
