"""Built-in systems: three worked three-degree-of-freedom examples with their
printed closed forms, and generators for the standard classes.

Printed data is stored verbatim.  Items known to be misprinted carry a
``resolved`` expression; the regression suite confirms that the printed
form disagrees with the pipeline and the resolved form agrees.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .errors import BadPartition, DomainError, ValidationError
from .expr import Const, Expression, const, free_variables, parse, substitute
from .phase import CoordinateChart, chart_jacobian
from .stackel import SeparationSystem

ROW = ("l", "m")
Q3 = ("q1", "q2", "q3")
P3 = ("p1", "p2", "p3")
QP3 = Q3 + P3


def _row(text: str) -> Expression:
    return parse(text, ROW)


def _as_row_expr(x) -> Expression:
    """Coerce numbers and text; closed constant expressions fold to ``Const``."""
    if isinstance(x, (int, float, Fraction)):
        return const(x)
    e = x if isinstance(x, Expression) else _row(str(x))
    if not free_variables(e):
        return substitute(e, {})
    return e


# ---------------------------------------------------------------------------
# generators

def benenti(n: int, f="1", gamma="0", name: str | None = None) -> SeparationSystem:
    """Single block, ``sum_j H_j l^(n-j) = f(l) m^2 / 2 + gamma(l)``."""
    f, gamma = _as_row_expr(f), _as_row_expr(gamma)
    psi = Const(1) / 2 * f * parse("m^2", ROW) + gamma
    return SeparationSystem(name or f"benenti{n}", n, (n,), (Const(1),), psi)


def multi_block(alpha, partition, f="1", gamma="0", name: str | None = None) -> SeparationSystem:
    """``sum_k l^alpha_k H^(k)(l) = f(l) m^2 / 2 + gamma(l)``; ``alpha_m = 0``."""
    alpha = tuple(int(a) for a in alpha)
    partition = tuple(int(p) for p in partition)
    if len(alpha) != len(partition):
        raise BadPartition(f"{len(alpha)} exponents for {len(partition)} blocks")
    if alpha[-1] != 0:
        raise ValidationError("the last exponent must be 0 (normalization phi^m = 1)")
    powers = [a + nk - j for a, nk in zip(alpha, partition) for j in range(1, nk + 1)]
    if len(set(powers)) != len(powers):
        # two columns of S would be the same monomial in l
        raise ValidationError(f"exponents {alpha} with partition {partition} give a singular Stackel matrix")
    phi = tuple(parse(f"l^{a}", ROW) if a else Const(1) for a in alpha)
    f, gamma = _as_row_expr(f), _as_row_expr(gamma)
    psi = Const(1) / 2 * f * parse("m^2", ROW) + gamma
    n = sum(partition)
    return SeparationSystem(name or f"multi_block{alpha}{partition}", n, partition, phi, psi)


def cubic_class(n1: int, n2: int, f="1", gamma1="0", gamma2="0", name: str | None = None) -> SeparationSystem:
    """``m H^(1)(l) + H^(2)(l) = f(l) m^3 / 3 + m gamma1(l) + gamma2(l)``."""
    f, g1, g2 = _as_row_expr(f), _as_row_expr(gamma1), _as_row_expr(gamma2)
    psi = Const(1) / 3 * f * parse("m^3", ROW) + parse("m", ROW) * g1 + g2
    return SeparationSystem(
        name or f"cubic{n1}_{n2}", n1 + n2, (n1, n2), (parse("m", ROW), Const(1)), psi
    )


def exponential_class(n: int, a=1, b=1, gamma="0", name: str | None = None) -> SeparationSystem:
    """``sum_j H_j l^(n-j) = exp(a m) + exp(-b m) + gamma(l)``."""
    a, b = _as_row_expr(a), _as_row_expr(b)
    m = parse("m", ROW)
    from .expr import exp

    psi = exp(a * m) + exp(-(b * m)) + _as_row_expr(gamma)
    return SeparationSystem(name or f"exponential{n}", n, (n,), (Const(1),), psi)


# ---------------------------------------------------------------------------
# charts

def _steps(pairs, allowed):
    out = []
    names = list(allowed)
    for name, text in pairs:
        out.append((name, parse(text, names)))
        names.append(name)
    return tuple(out), names


def _real_roots(coeffs, what: str) -> np.ndarray:
    roots = np.roots(coeffs)
    scale = 1.0 + np.abs(roots).max()
    if np.any(np.abs(roots.imag) > 1e-9 * scale):
        raise DomainError(f"{what}: the characteristic cubic has complex roots")
    return np.sort(roots.real)


def _point_inverse(chart: CoordinateChart, sigma_fn):
    """Inverse of a point chart whose positions determine the elementary
    symmetric polynomials of ``l`` through ``sigma_fn(q)``."""

    def inverse(y):
        y = np.asarray(y, dtype=float)
        n = chart.n
        q, p = y[:n], y[n: 2 * n]
        sig = sigma_fn(q)
        coeffs = [1.0] + [(-1) ** (k + 1) * s for k, s in enumerate(sig)]
        lam = _real_roots(coeffs, chart.name)
        jac = chart_jacobian(chart, np.concatenate([lam, np.zeros(n)]))
        mu = jac[:n, :n].T @ p
        return np.concatenate([lam, mu])

    return inverse


def flat_chart() -> CoordinateChart:
    """Point transform to the flat coordinates of the single-block geodesic example."""
    steps, names = _steps(
        [
            ("s1", "l1 + l2 + l3"),
            ("s2", "l1*l2 + l1*l3 + l2*l3"),
            ("s3", "l1*l2*l3"),
            ("a2", "2*s2 - s1^2/2"),
        ],
        ("l1", "l2", "l3"),
    )
    forward = (parse("s1", names), parse("a2", names), parse("4*s3 - s1*a2", names))
    chart = CoordinateChart("flat", 3, "point", forward, steps=steps, targets=Q3)

    def sigma(q):
        return (q[0], q[0] ** 2 / 4 + q[1] / 2, q[0] * q[1] / 4 + q[2] / 4)

    return CoordinateChart(
        "flat", 3, "point", forward, steps=steps, targets=Q3, inverse=_point_inverse(chart, sigma)
    )


def cubic_chart() -> CoordinateChart:
    """Explicit chart for the cubic example, written in the direction
    ``(l, m) -> (q, p)``: symmetric polynomials ``u`` of ``l``, the
    interpolation coefficients ``v`` of ``m_i = v1 l_i^2 + v2 l_i + v3`` and
    then the triangular inversion of the printed ``(u, v)(q, p)`` relations.
    The map reverses the sign of the symplectic form."""
    src = ("l1", "l2", "l3", "m1", "m2", "m3")
    steps, names = _steps(
        [
            ("u1", "l1 + l2 + l3"),
            ("u2", "l1*l2 + l1*l3 + l2*l3"),
            ("u3", "l1*l2*l3"),
            ("d1", "(l1 - l2)*(l1 - l3)"),
            ("d2", "(l2 - l1)*(l2 - l3)"),
            ("d3", "(l3 - l1)*(l3 - l2)"),
            ("v1", "m1/d1 + m2/d2 + m3/d3"),
            ("v2", "-(m1*(l2 + l3)/d1 + m2*(l1 + l3)/d2 + m3*(l1 + l2)/d3)"),
            ("v3", "m1*l2*l3/d1 + m2*l1*l3/d2 + m3*l1*l2/d3"),
            ("x1", "-1/v1"),
            ("x3", "v2*x1 - u1"),
            ("x2", "(u1 + 3*x3)/3"),
            ("s23", "(3*x3^2 + 5*x1^3 - 6*x2*x3 - u2)/x1"),
            ("r", "v3 + x3^2/x1 - 3*x2*x3/x1 + 4*x1^2"),
            ("y2", "3*(s23 - r)"),
            ("y3", "s23 - y2"),
            ("y1", "(u3 + x3^3 + 9*x1^3*x3 - x1*x3*s23 + 6*x1^3*x2 - 3*x2*x3^2)/x1^2"),
        ],
        src,
    )
    forward = tuple(parse(v, names) for v in ("x1", "x2", "x3", "y1", "y2", "y3"))

    def inverse(y):
        q1, q2, q3, p1, p2, p3 = (float(v) for v in y[:6])
        u1 = 3 * q2 - 3 * q3
        u2 = -q1 * p2 - q1 * p3 + 3 * q3**2 + 5 * q1**3 - 6 * q2 * q3
        u3 = (-q3**3 - 9 * q1**3 * q3 + q1 * q3 * p2 + q1 * q3 * p3 - 6 * q1**3 * q2
              + q1**2 * p1 + 3 * q2 * q3**2)
        v1 = -1 / q1
        v2 = (3 * q2 - 2 * q3) / q1
        v3 = p3 + 2 * p2 / 3 - q3**2 / q1 + 3 * q2 * q3 / q1 - 4 * q1**2
        lam = _real_roots([1.0, -u1, u2, -u3], "cubic")
        mu = v1 * lam**2 + v2 * lam + v3
        return np.concatenate([lam, mu])

    return CoordinateChart(
        "cubic", 3, "full", forward, steps=steps, targets=QP3, inverse=inverse, symplectic_sign=-1
    )


# ---------------------------------------------------------------------------
# printed data

@dataclass(frozen=True)
class PrintedItem:
    """One printed closed form and where the pipeline value comes from.

    ``kind`` is one of ``hamiltonian``, ``control``, ``pi1``, ``extended``,
    ``chart``; ``target`` indexes the pipeline quantity (global index,
    matrix entry, ``(k, i)`` chain position, or chart-formula name).
    """

    key: str
    kind: str
    target: tuple
    printed: Expression
    resolved: Expression | None = None
    note: str = ""

    @property
    def quarantined(self) -> bool:
        return self.resolved is not None

    @property
    def authoritative(self) -> Expression:
        return self.resolved if self.resolved is not None else self.printed


@dataclass(frozen=True)
class CorpusEntry:
    name: str
    system: SeparationSystem
    chart: str
    variables: tuple            # chart variables, then Casimir names
    items: tuple = ()
    description: str = ""
    extra: dict = field(default_factory=dict, compare=False)

    def by_kind(self, kind: str) -> list[PrintedItem]:
        return [it for it in self.items if it.kind == kind]

    def item(self, key: str) -> PrintedItem:
        for it in self.items:
            if it.key == key:
                return it
        raise KeyError(key)

    def matrix(self, kind: str, resolved: bool = True) -> list[list[Expression]]:
        """Printed matrix (``pi1`` or ``control``) as nested expressions."""
        entries = {it.target: (it.authoritative if resolved else it.printed) for it in self.by_kind(kind)}
        size = 1 + max(t[0] for t in entries)
        return [[entries[(i, j)] for j in range(size)] for i in range(size)]

    @property
    def quarantine(self) -> list[PrintedItem]:
        return [it for it in self.items if it.quarantined]


def _p(text: str, variables) -> Expression:
    return parse(text, variables)


def _matrix_items(prefix, kind, rows, variables, resolved=None, notes=None):
    resolved = resolved or {}
    notes = notes or {}
    out = []
    for i, row in enumerate(rows):
        for j, text in enumerate(row):
            res = resolved.get((i + 1, j + 1))
            out.append(PrintedItem(
                f"{prefix}[{i + 1},{j + 1}]", kind, (i, j), _p(text, variables),
                None if res is None else _p(res, variables), notes.get((i + 1, j + 1), ""),
            ))
    return out


def _scaled(rows, factor):
    return [[f"({factor})*({t})" if t != "0" else "0" for t in row] for row in rows]


# Example 1 ---------------------------------------------------------------

EX1_H = (
    "p1*p3 + 1/2*p2^2",
    "1/2*q3*p3^2 - 1/2*q1*p2^2 + 1/2*q2*p2*p3 - 1/2*p1*p2 - 1/2*q1*p1*p3",
    "1/8*q2^2*p3^2 + 1/8*q1^2*p2^2 + 1/8*p1^2 + 1/4*q1*p1*p2 + 1/4*q2*p1*p3"
    " - 1/4*q1*q2*p2*p3 - 1/2*q3*p2*p3",
)
EX1_SIGMA = ("q1", "1/4*q1^2 + 1/2*q2", "1/4*q1*q2 + 1/4*q3")


def example1() -> CorpusEntry:
    chart = flat_chart()
    sys = benenti(3, f="1/4", name="example1").with_charts([chart])
    v = QP3
    ve = QP3 + ("c1",)
    items = []
    for g, text in enumerate(EX1_H):
        items.append(PrintedItem(f"H{g + 1}", "hamiltonian", (g,), _p(text, v)))
    for k, text in enumerate(EX1_SIGMA):
        items.append(PrintedItem(f"sigma{k + 1}", "chart", (f"sigma{k + 1}",), _p(text, v)))
    pi1 = [
        ["0", "0", "0", "q1", "-1", "0"],
        ["0", "0", "0", "q2", "0", "-1"],
        ["0", "0", "0", "2*q3", "q2", "q1"],
        ["-q1", "-q2", "-2*q3", "0", "p2", "p3"],
        ["1", "0", "-q2", "-p2", "0", "0"],
        ["0", "1", "-q1", "-p3", "0", "0"],
    ]
    items += _matrix_items("Pi1", "pi1", _scaled(pi1, "1/2"), v)
    f_rows = [
        ["q1", "1", "0"],
        ["-1/4*q1^2 - 1/2*q2^2", "0", "1"],
        ["1/2*q1*q2 + 1/4*q3", "0", "0"],
    ]
    items += _matrix_items(
        "F", "control", f_rows, v,
        resolved={(2, 1): "-1/4*q1^2 - 1/2*q2", (3, 1): "1/4*q1*q2 + 1/4*q3"},
        notes={
            (2, 1): "q2 is printed squared; the entry equals -sigma2",
            (3, 1): "coefficient of q1*q2 printed as 1/2; the entry equals sigma3",
        },
    )
    h_printed = {
        1: f"{EX1_H[0]} - c1*q1",
        2: "1/2*q3*p3^2 - 1/2*q1^2*p2^2 + 1/2*q2*p2*p3 - 1/2*p1*p2 - 1/2*q1*p1*p3"
           " + (1/4*q1^2 + 1/2*q2^2)*c1",
        3: f"{EX1_H[2]} - (1/2*q1*q2 + 1/4*q3)*c1",
    }
    h_resolved = {
        2: f"{EX1_H[1]} + (1/4*q1^2 + 1/2*q2)*c1",
        3: f"{EX1_H[2]} - (1/4*q1*q2 + 1/4*q3)*c1",
    }
    h_notes = {
        2: "q1*p2^2 printed as q1^2*p2^2 and the c-coefficient inherits the control-matrix slip",
        3: "c-coefficient inherits the control-matrix slip",
    }
    items.append(PrintedItem("h0", "extended", (1, 0), _p("c1", ve)))
    for i in (1, 2, 3):
        res = h_resolved.get(i)
        items.append(PrintedItem(
            f"h{i}", "extended", (1, i), _p(h_printed[i], ve),
            None if res is None else _p(res, ve), h_notes.get(i, ""),
        ))
    return CorpusEntry(
        "example1", sys, "flat", ve, tuple(items),
        "bare Benenti curve H1 l^2 + H2 l + H3 = m^2/8 in flat coordinates",
    )


# Example 2 ---------------------------------------------------------------

def _ex2_expr(text: str, variables) -> Expression:
    """Parse text over ``H1..H3, s1..s3, Hb1..Hb3`` plus chart/Casimir
    variables and substitute the closed forms in ``(q, p)``."""
    names = list(variables) + ["H1", "H2", "H3", "s1", "s2", "s3", "Hb1", "Hb2", "Hb3"]
    e = parse(text, names)
    base = {f"H{i + 1}": _p(t, QP3) for i, t in enumerate(EX1_H)}
    base.update({f"s{i + 1}": _p(t, QP3) for i, t in enumerate(EX1_SIGMA)})
    hb = {
        "Hb1": substitute(parse("-H2/s2", names), base),
        "Hb2": substitute(parse("H1 + s1/s2*H2", names), base),
        "Hb3": substitute(parse("H3 + s3/s2*H2", names), base),
    }
    return substitute(substitute(e, hb), base)


def example2() -> CorpusEntry:
    chart = flat_chart()
    sys = multi_block((2, 0), (2, 1), f="1/4", name="example2")
    sys = SeparationSystem(
        sys.name, sys.n, sys.partition, sys.phi, sys.psi, (chart,),
        (parse("l1*l2 + l1*l3 + l2*l3", ("l1", "l2", "l3", "m1", "m2", "m3")),),
        "block form l^2 (H1 l + H2) + H3 = m^2/8",
    )
    ve = QP3 + ("c1", "c2")
    items = []
    rel_printed = ("-H2/s2", "H1 - s1/s2*H2", "H3 - s3/s2*H2")
    rel_resolved = (None, "H1 + s1/s2*H2", "H3 + s3/s2*H2")
    for g in range(3):
        res = rel_resolved[g]
        items.append(PrintedItem(
            f"Hbar{g + 1}", "hamiltonian", (g,), _ex2_expr(rel_printed[g], QP3),
            None if res is None else _ex2_expr(res, QP3),
            "" if res is None else "sign of the sigma-ratio term is printed as minus",
        ))
    f_rows = [
        ["s1 - s3/s2", "1", "-1/s2"],
        ["-s2 + s1*s3/s2", "0", "s1/s2"],
        ["s3/s2", "0", "s3/s2"],
    ]
    for i, row in enumerate(f_rows):
        for j, text in enumerate(row):
            res = "s3^2/s2" if (i, j) == (2, 0) else None
            items.append(PrintedItem(
                f"F[{i + 1},{j + 1}]", "control", (i, j), _ex2_expr(text, QP3),
                None if res is None else _ex2_expr(res, QP3),
                "printed s3/s2; the entry is s3^2/s2" if res else "",
            ))
    h = [
        ((1, 0), "c1", None),
        ((1, 1), "Hb1 - (s1 - s3/s2)*c1 + 1/s2*c2", None),
        ((1, 2), "Hb2 + (s2 - s1*s3/s2)*c1 - s1/s2*c2", None),
        ((2, 0), "c2", None),
        ((2, 1), "Hb3 - s2^2/s2*c1 - s3/s2*c2", "Hb3 - s3^2/s2*c1 - s3/s2*c2"),
    ]
    for (k, i), text, res in h:
        items.append(PrintedItem(
            f"h{i}^({k})", "extended", (k, i), _ex2_expr(text, ve),
            None if res is None else _ex2_expr(res, ve),
            "c1-coefficient printed as s2^2/s2; it is -F[3,1] = -s3^2/s2" if res else "",
        ))
    return CorpusEntry(
        "example2", sys, "flat", ve, tuple(items),
        "two-block curve Hb1 l^3 + Hb2 l^2 + Hb3 = m^2/8 (partition 2,1, phi^1 = l^2)",
    )


# Example 3 ---------------------------------------------------------------

EX3_H = (
    "p2*p3 + 1/3*p2^2 + p3^2 - 7*q1^2*p3 - 4*q1^2*p2 - 3*q2*p1 + 18*q1*q2^2 + 13*q1^4"
    " + 12*q3*q1*q2",
    "12*q1^3*q2 + 8*q1^3*q3 - 2*q1^2*p1 + (-6*q1*q2 - 4*q1*q3)*p3 + p1*p3",
    "1/3*p2*p3^2 + 1/3*p2^2*p3 + 2/27*p2^3 - q1^2*p3^2 - 4/3*q1^2*p2^2 - q2*p1*p2 - q1*p1^2"
    " - 10/3*q1^2*p3*p2 + (q3 - 3*q2)*p1*p3 + (21*q1^2*q2 + 6*q3*q1^2)*p1"
    " + (4*q3*q1*q2 + 6*q1*q2^2 + 22/3*q1^4)*p2"
    " + (7*q1^4 + 18*q1*q2^2 + 6*q3*q1*q2 - 4*q1*q3^2)*p3"
    " - 8*q1^3*q3^2 - 72*q3*q1^3*q2 - 90*q1^3*q2^2 - 12*q1^6",
)
EX3_F = (
    ("-q3", "-q1", "0"),
    ("-1/3*p2 + q1^2", "-2*q3 + 3*q2", "1"),
    ("5*q3*q1^2 + 6*q1^2*q2 - q1*p1 - 1/3*q3*p2",
     "-4*q1^3 - q3^2 + 3*q2*q3 + 2/3*q1*p2 + q1*p3", "0"),
)
EX3_UV = (
    ("u1", "3*q2 - 3*q3", None),
    ("u2", "-q1*p2 - q1*p3 + 3*q3^2 + 5*q1^3 - 6*q2*q3", None),
    ("u3", "-q3^3 - 9*q1^3*q3 + q1*q3*p2 + q1*q3*p3 - 2/27*q1^3*q2 + q1^2*p1 + 3*q2*q3^2",
     "-q3^3 - 9*q1^3*q3 + q1*q3*p2 + q1*q3*p3 - 6*q1^3*q2 + q1^2*p1 + 3*q2*q3^2"),
    ("v1", "-1/q1", None),
    ("v2", "(3*q2 - 2*q3)/q1", None),
    ("v3", "p3 + 2/3*p2 - q3^2/q1 + 3*q2*q3/q1 - 4*q1^2", None),
)


def example3() -> CorpusEntry:
    chart = cubic_chart()
    src = ("l1", "l2", "l3", "m1", "m2", "m3")
    sys = cubic_class(1, 2, f="3", name="example3")
    sys = SeparationSystem(
        sys.name, sys.n, sys.partition, sys.phi, sys.psi, (chart,),
        # q1 = -1/v1; the chart degenerates where q1 vanishes
        (parse("1/(m1/((l1 - l2)*(l1 - l3)) + m2/((l2 - l1)*(l2 - l3)) + m3/((l3 - l1)*(l3 - l2)))", src),),
        "cubic curve m H1 + H2 l + H3 = m^3",
    )
    v = QP3
    ve = QP3 + ("c1", "c2")
    items = []
    for g, text in enumerate(EX3_H):
        items.append(PrintedItem(f"H{g + 1}", "hamiltonian", (g,), _p(text, v)))
    for name, text, res in EX3_UV:
        items.append(PrintedItem(
            name, "chart", (name,), _p(text, v), None if res is None else _p(res, v),
            "coefficient of q1^3*q2 printed as -2/27; the relation needs -6" if res else "",
        ))
    a_pr, a_res = "(-1/3*p2 + 1/3*p3 - 3*q1^2)", "(1/3*p2 + 1/3*p3 - 3*q1^2)"
    b = "(54*q1*q2 + 24*q1*q3 - 3*p1)"
    c = "(-24*q1*q2 - 12*q1*q3 + p1)"
    pi1 = [
        ["0", "0", "0", "-q3", "3*q1", "2*q2"],
        ["0", "0", "-1/3*q1", a_pr, "3*q2 - q3", "-q2"],
        ["0", "1/3*q1", "0", "2*q1^2", "0", "-q3"],
        ["-q3", f"-{a_pr}", "-2*q1^2", "0", b, c],
        ["1 - 3*q1", "-3*q2 + q3", "0", f"-{b}", "0", "-24*q1^2"],
        ["2*q1", "q2", "q3", f"-{c}", "24*q1^2", "0"],
    ]
    items += _matrix_items(
        "Pi1", "pi1", pi1, v,
        resolved={
            (1, 6): "-2*q1", (4, 1): "q3", (5, 1): "-3*q1",
            (2, 4): a_res, (4, 2): f"-{a_res}",
        },
        notes={
            (1, 6): "printed 2*q2; antisymmetric partner (6,1) = 2*q1 is right",
            (4, 1): "printed -q3 breaks antisymmetry with (1,4) = -q3",
            (5, 1): "printed 1 - 3*q1 breaks antisymmetry with (1,5) = 3*q1",
            (2, 4): "A: the p2 term carries a plus sign",
            (4, 2): "A: the p2 term carries a plus sign",
        },
    )
    items += _matrix_items("F", "control", EX3_F, v)
    h = [
        ((1, 0), "c1"),
        ((1, 1), f"{EX3_H[0]} + q3*c1 + q1*c2"),
        ((2, 0), "c2"),
        ((2, 1), f"{EX3_H[1]} + (1/3*p2 - q1^2)*c1 + (2*q3 - 3*q2)*c2"),
        ((2, 2), f"{EX3_H[2]} - ({EX3_F[2][0]})*c1 - ({EX3_F[2][1]})*c2"),
    ]
    for (k, i), text in h:
        items.append(PrintedItem(f"h{i}^({k})", "extended", (k, i), _p(text, ve)))
    return CorpusEntry(
        "example3", sys, "cubic", ve, tuple(items),
        "cubic curve m H1^(1) + H1^(2) l + H2^(2) = m^3 in polynomial coordinates",
        extra={"source": src},
    )


def examples() -> list[CorpusEntry]:
    return [example1(), example2(), example3()]


def chart_formula_values(entry: CorpusEntry, x: np.ndarray) -> dict:
    """Pipeline values of the printed chart formulas at a separation point."""
    n = entry.system.n
    lam, mu = x[:n], x[n: 2 * n]
    u = (lam.sum(), lam[0] * lam[1] + lam[0] * lam[2] + lam[1] * lam[2], lam.prod())
    out = {"sigma1": u[0], "sigma2": u[1], "sigma3": u[2], "u1": u[0], "u2": u[1], "u3": u[2]}
    vand = np.vander(lam, 3)
    v = np.linalg.solve(vand, mu)
    out.update({"v1": v[0], "v2": v[1], "v3": v[2]})
    return out


def chart_hamiltonian_system(entry: CorpusEntry):
    """``(pi, fields)``: the pushed-forward canonical tensor ``sign * Omega`` and
    the printed Hamiltonians (resolved where quarantined) as fields on the
    ``2n`` chart coordinates.

    Flows of the separable systems routinely leave the region where all
    ``l_i`` are real and distinct; in chart coordinates they stay smooth.
    """
    from .poisson import ScalarField, canonical_bivector

    n = entry.system.n
    chart = entry.system.chart(entry.chart)
    names = entry.variables[: 2 * n]
    items = sorted(entry.by_kind("hamiltonian"), key=lambda it: it.target[0])
    fields = [ScalarField.from_expression(it.authoritative, names) for it in items]
    return canonical_bivector(n).scaled(chart.symplectic_sign), fields


FLOW_RADIUS = 0.1
# Example 2 divides by sigma2 = q1^2/4 + q2/2: keep q2 away from 0
FLOW_CENTERS = {"example2": (0.0, 1.5, 0.0, 0.0, 0.0, 0.0)}


def flow_start_points(entry: CorpusEntry, count: int, seed: int = 0, radius: float = FLOW_RADIUS) -> np.ndarray:
    """Seeded chart points in a small box around the entry's flow center.

    The printed Hamiltonians are polynomial in the momenta, so orbits started
    far out can run off to infinity within a few time units; from this box
    every flow stays bounded over ``t <= 5``.
    """
    n2 = 2 * entry.system.n
    center = np.asarray(FLOW_CENTERS.get(entry.name, (0.0,) * n2))
    rng = np.random.default_rng(seed)
    return center + rng.uniform(-radius, radius, (count, n2))


def builtin_systems() -> dict:
    """Named systems used by the test battery and the CLI catalog."""
    return {
        "example1": example1().system,
        "example2": example2().system,
        "example3": example3().system,
        "benenti4": benenti(4, name="benenti4"),
        "exponential2": exponential_class(2, 1, 1, name="exponential2"),
        "harmonic2": benenti(2, gamma="1/2*l^2", name="harmonic2"),
        "quartic2": benenti(2, gamma="l^4", name="quartic2"),
        "cubic_1_1": cubic_class(1, 1, name="cubic_1_1"),
    }


__all__ = [
    "benenti", "multi_block", "cubic_class", "exponential_class", "flat_chart", "cubic_chart",
    "PrintedItem", "CorpusEntry", "example1", "example2", "example3", "examples",
    "chart_formula_values", "chart_hamiltonian_system", "flow_start_points", "builtin_systems", "EX1_H", "EX3_H",
]
