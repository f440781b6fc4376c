"""Homotopies ``F: M x [a,b] -> N``, flows, and the homotopy operator."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Mapping

from .cylinder import canonical_lift, horizontalize, nabla
from .exterior import DegreeError, DiffForm, VectorField, apply_field, d, interior, pullback, wedge
from .integration import CheckResult, LiftedFunctional, lift_apply_form
from .scalar import ScalarExpr, ZeroTestConfig, as_fraction, exp, symbol, zero_test
from .spaces import AnySpace, CylinderSpace, SmoothMap, Space, SpaceMismatch, compose, identity, slicing

__all__ = [
    "Homotopy",
    "RelativeVectorField",
    "FlowCheck",
    "map_family_derivative",
    "flow_check",
    "interior_relative",
    "contract_along",
    "homotopy_operator",
    "verify_homotopy_formula",
    "universal_nl_check",
    "linear_contraction",
    "straight_line_homotopy",
    "translation_flow",
    "scaling_flow",
    "lifted_flow",
]


@dataclass(frozen=True)
class Homotopy:
    map: SmoothMap
    a: Fraction = Fraction(0)
    b: Fraction = Fraction(1)

    def __post_init__(self):
        object.__setattr__(self, "a", as_fraction(self.a))
        object.__setattr__(self, "b", as_fraction(self.b))
        src = self.map.source
        if not isinstance(src, CylinderSpace) or len(src.params.coords) != 1:
            raise SpaceMismatch("a homotopy needs a source of the form M x [a,b]")
        if not self.a < self.b:
            raise ValueError("homotopy interval needs a < b")

    @property
    def cyl(self) -> CylinderSpace:
        return self.map.source

    @property
    def var(self) -> str:
        return self.cyl.params.coords[0]

    @property
    def base(self) -> AnySpace:
        return self.cyl.base

    @property
    def target(self) -> AnySpace:
        return self.map.target

    def at(self, value) -> SmoothMap:
        """The slice ``F o iota_value`` as a map from the base to the target."""
        return compose(self.map, slicing(self.cyl, {self.var: value}))

    def start(self) -> SmoothMap:
        return self.at(self.a)

    def end(self) -> SmoothMap:
        return self.at(self.b)

    def time_field(self) -> VectorField:
        return canonical_lift(VectorField(self.cyl.params, {self.var: 1}), self.cyl)

    def integral(self, method: str = "auto", nodes: int = 32) -> LiftedFunctional:
        return LiftedFunctional.integral(self.var, self.a, self.b, method=method, nodes=nodes)


@dataclass(frozen=True)
class RelativeVectorField:
    """A field along ``along``: components indexed by target coordinates, valued in source functions."""

    along: SmoothMap
    components: Mapping[str, ScalarExpr]
    generator: VectorField | None = None

    def __post_init__(self):
        comps = dict(self.components)
        if set(comps) != set(self.along.target.coords):
            raise SpaceMismatch("relative field must be keyed by the target coordinates")
        object.__setattr__(self, "components", {c: comps[c] for c in self.along.target.coords})

    def coefficients(self):
        return list(self.components.values())

    def __str__(self) -> str:
        return ", ".join(f"{c}: {v}" for c, v in self.components.items())


def map_family_derivative(F: Homotopy | SmoothMap, X: VectorField) -> RelativeVectorField:
    """``X(F) = lift(X) o F*``: the velocity of the family of maps along ``X`` (a field on G)."""
    smap = F.map if isinstance(F, Homotopy) else F
    cyl = smap.source
    if not isinstance(cyl, CylinderSpace) or X.space != cyl.params:
        raise SpaceMismatch("X must be a field on the parameter factor of the map's source")
    lifted = canonical_lift(X, cyl)
    comps = {c: apply_field(lifted, e) for c, e in smap.components.items()}
    return RelativeVectorField(smap, comps, lifted)


@dataclass(frozen=True)
class FlowCheck:
    derivation: CheckResult
    initial: CheckResult

    @property
    def passed(self) -> bool:
        return self.derivation.passed and self.initial.passed


def flow_check(A: SmoothMap, X: VectorField, config: ZeroTestConfig | None = None) -> FlowCheck:
    """Check ``d/dt o A* == A* o X`` on coordinate functions and ``A o iota_0 == id``."""
    cyl = A.source
    if not isinstance(cyl, CylinderSpace) or len(cyl.params.coords) != 1:
        raise SpaceMismatch("a flow is a map M x G -> M with one-dimensional G")
    if A.target != cyl.base or X.space != cyl.base:
        raise SpaceMismatch("flow and field must live on the base of the cylinder")
    t = cyl.params.coords[0]
    residuals = []
    for c in cyl.base.coords:
        lhs = A.components[c].partial(t)
        rhs = A.pull_scalar(X.component(c))
        residuals.append(lhs - rhs)
    start = compose(A, slicing(cyl, {t: 0}))
    ident = identity(cyl.base)
    gaps = [start.components[c] - ident.components[c] for c in cyl.base.coords]
    return FlowCheck(
        CheckResult(zero_test(residuals, config), residuals),
        CheckResult(zero_test(gaps, config), gaps),
    )


def contract_along(V: RelativeVectorField, omega: DiffForm) -> DiffForm:
    """``i_V omega`` computed directly from the components of ``V`` and the differentials of the map."""
    F = V.along
    if omega.space != F.target:
        raise SpaceMismatch("form must live on the target of the map")
    if omega.degree == 0:
        raise DegreeError("contraction needs a form of degree >= 1")
    source = F.source
    dF = {c: d(DiffForm.function(source, F.components[c])) for c in F.target.coords}
    out = DiffForm.zero(source, omega.degree - 1)
    for idx, coef in omega.terms.items():
        pulled = F.pull_scalar(coef)
        for j, c in enumerate(idx):
            piece = DiffForm.function(source, V.components[c] * pulled)
            for k, other in enumerate(idx):
                if k != j:
                    piece = wedge(piece, dF[other])
            out = out + (piece if j % 2 == 0 else -piece)
    return out


def interior_relative(V: RelativeVectorField, omega: DiffForm) -> DiffForm:
    """``i_V omega``, taken as ``i_{X~}(F* omega)`` where ``X~`` generated ``V``."""
    if V.generator is None:
        return contract_along(V, omega)
    if omega.space != V.along.target:
        raise SpaceMismatch("form must live on the target of the map")
    return interior(V.generator, pullback(V.along, omega))


def homotopy_operator(H: Homotopy, omega: DiffForm, method: str = "auto", nodes: int = 32) -> DiffForm:
    """``h(omega) = int_a^b p0(i_{d/dt} F* omega)``, a form of degree one less on the base."""
    if omega.space != H.target:
        raise SpaceMismatch(f"form lives on {omega.space.name}, homotopy targets {H.target.name}")
    if omega.degree == 0:
        raise DegreeError("the homotopy operator lowers degree; 0-forms are not accepted")
    contracted = interior(H.time_field(), pullback(H.map, omega))
    return lift_apply_form(H.integral(method, nodes), horizontalize(contracted))


def _h_or_zero(H: Homotopy, omega: DiffForm, method: str, nodes: int) -> DiffForm:
    if omega.degree == 0:
        return DiffForm.zero(H.base, 0)
    return homotopy_operator(H, omega, method, nodes)


def verify_homotopy_formula(H: Homotopy, omega: DiffForm, *, method: str = "auto", nodes: int = 32,
                            config: ZeroTestConfig | None = None) -> CheckResult:
    """Residual of ``F_b* - F_a* = h d + d h`` on ``omega``; the residual is the witness."""
    if omega.space != H.target:
        raise SpaceMismatch(f"form lives on {omega.space.name}, homotopy targets {H.target.name}")
    ends = pullback(H.end(), omega) - pullback(H.start(), omega)
    h_d = _h_or_zero(H, d(omega), method, nodes)
    if omega.degree == 0:
        residual = ends - h_d
    else:
        residual = ends - h_d - d(homotopy_operator(H, omega, method, nodes))
    return CheckResult(zero_test(residual.coefficients(), config), residual)


def universal_nl_check(H: Homotopy, omega: DiffForm, *, method: str = "auto", nodes: int = 32,
                       config: ZeroTestConfig | None = None) -> CheckResult:
    """``I_a^b o nabla_{d/dt} o p0 o F* == F_b* - F_a*`` on ``omega``."""
    if omega.space != H.target:
        raise SpaceMismatch(f"form lives on {omega.space.name}, homotopy targets {H.target.name}")
    ddt = VectorField(H.cyl.params, {H.var: 1})
    lhs = lift_apply_form(H.integral(method, nodes), nabla(ddt, horizontalize(pullback(H.map, omega))))
    rhs = pullback(H.end(), omega) - pullback(H.start(), omega)
    residual = lhs - rhs
    return CheckResult(zero_test(residual.coefficients(), config), residual)


# --------------------------------------------------------------------------
# standard homotopies and flows


def linear_contraction(n: int, base_names=("x", "y", "z", "w"), target_names=("u", "v", "s", "r"), var: str = "t") -> Homotopy:
    """``F(p, t) = t p`` from ``R^n x [0,1]`` to ``R^n``."""
    M = Space("M", base_names[:n])
    N = Space("N", target_names[:n])
    cyl = CylinderSpace(M, Space("I", (var,)), "C")
    t = symbol(var)
    F = SmoothMap(cyl, N, {u: t * symbol(x) for u, x in zip(N.coords, M.coords)}, name="F")
    return Homotopy(F, 0, 1)


def straight_line_homotopy(F0: SmoothMap, F1: SmoothMap, var: str = "t") -> Homotopy:
    """``(1 - t) F0 + t F1`` on ``[0, 1]``."""
    if F0.source != F1.source or F0.target != F1.target:
        raise SpaceMismatch("straight-line homotopy needs maps with equal source and target")
    cyl = CylinderSpace(F0.source, Space("I", (var,)), "C")
    t = symbol(var)
    comps = {c: (1 - t) * F0.components[c] + t * F1.components[c] for c in F0.target.coords}
    return Homotopy(SmoothMap(cyl, F0.target, comps, name="H"), 0, 1)


def translation_flow(M: AnySpace, velocity: Mapping[str, object], var: str = "t") -> tuple[SmoothMap, VectorField]:
    cyl = CylinderSpace(M, Space("G", (var,)))
    t = symbol(var)
    v = {c: as_fraction(velocity.get(c, 0)) for c in M.coords}
    A = SmoothMap(cyl, M, {c: symbol(c) + t * v[c] for c in M.coords}, name="A")
    return A, VectorField(M, v)


def scaling_flow(M: AnySpace, var: str = "t") -> tuple[SmoothMap, VectorField]:
    cyl = CylinderSpace(M, Space("G", (var,)))
    t = symbol(var)
    A = SmoothMap(cyl, M, {c: exp(t) * symbol(c) for c in M.coords}, name="A")
    return A, VectorField(M, {c: symbol(c) for c in M.coords})


def lifted_flow(A: SmoothMap, product: CylinderSpace) -> SmoothMap:
    """The flow ``((p, q), t) -> (A(p, t), q)`` on ``product = M x N`` built from a flow on ``M``."""
    cyl = A.source
    if product.base != A.target:
        raise SpaceMismatch("the first factor of the product must be the flow's manifold")
    big = CylinderSpace(product, cyl.params)
    comps = dict(A.components)
    comps.update({c: symbol(c) for c in product.params.coords})
    return SmoothMap(big, product, comps, name="A~")
