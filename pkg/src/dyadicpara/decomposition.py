"""Exceptional sets, rectangle classification, and the class-by-class
summation bounds behind the restricted-weak-type verification.

The pipeline mirrors a proof by decomposition: calibrate a threshold kappa
so the inflated level sets of the governing operators cover less than half
the torus, excise that region from the support of the third input, label
every rectangle by the largest dyadic threshold its operator values exceed
on a 1/100 fraction, and bound the coefficient mass of each label class by
explicit constants times shadow measures and restricted operator norms.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field as dc_field
from typing import Optional

import numpy as np

from .errors import CalibrationError, ContractError
from .families import AdaptedFamily
from .lattice import DyadicInterval, DyadicRectangle, RectangleCollection, dilate
from .operators import OperatorSpec, governing_operator, restricted_operator
from .paraproducts import ParaproductSpec, eval_B, eval_Lambda, slot_operator_specs
from .signals import Signal, lp_norm
from .transforms import lattice_rectangles

FRACTION = 0.01  # bad-set fraction per hypothesis
OMEGA_FRACTION = 0.01  # threshold scale in the level-set union
DEFAULT_CLAMP = 40
KAPPA_LIMIT = float(2**20)


# ---------------------------------------------------------------------------
# Rectangle classification
# ---------------------------------------------------------------------------


def _block_quantiles(values: np.ndarray, levels, L: int, frac: float) -> np.ndarray:
    """Per rectangle of the level tuple, the m-th largest cell value with
    m = ceil(frac * cells); exceeding threshold t on >= frac of R is
    equivalent to this quantile exceeding t."""
    d = values.ndim
    shape = []
    for k in levels:
        shape.extend([1 << k, 1 << (L - k)])
    v = values.reshape(shape)
    order = [2 * a for a in range(d)] + [2 * a + 1 for a in range(d)]
    v = np.transpose(v, order).reshape([1 << k for k in levels] + [-1])
    cells = v.shape[-1]
    m = math.ceil(cells * frac)
    return np.partition(v, cells - m, axis=-1)[..., cells - m]


def _greatest_level(q: float, kappa: float, clamp: int) -> Optional[int]:
    """Largest integer l with kappa * 2^l < q, clamped to [-clamp, clamp];
    None when q <= 0 (no level set reaches the fraction)."""
    if q <= 0.0:
        return None
    ell = int(math.floor(math.log2(q / kappa)))
    while kappa * 2.0**ell >= q:
        ell -= 1
    while kappa * 2.0 ** (ell + 1) < q:
        ell += 1
    return max(min(ell, clamp), -clamp)


def classify_rectangles(
    f: Signal,
    op: OperatorSpec,
    kappa: float,
    frac: float = FRACTION,
    clamp: int = DEFAULT_CLAMP,
    values: Optional[Signal] = None,
) -> dict:
    """Label each lattice rectangle with the greatest l such that
    |R intersect {T f > kappa 2^l}| >= frac * |R|  (None if no l works)."""
    g = values if values is not None else governing_operator(f, op)
    labels = {}
    for levels in itertools.product(range(g.L), repeat=g.d):
        qs = _block_quantiles(g.values, levels, g.L, frac)
        for pos in itertools.product(*[range(1 << k) for k in levels]):
            rect = DyadicRectangle(
                tuple(DyadicInterval(k, p) for k, p in zip(levels, pos))
            )
            labels[rect] = _greatest_level(float(qs[pos]), kappa, clamp)
    return labels


def hypothesis_holds(
    t_values: Signal,
    collection: RectangleCollection,
    threshold: float,
    frac: float = FRACTION,
) -> bool:
    """True iff |R intersect {T > threshold}| <= frac |R| for all members."""
    for rect in collection.members:
        block = t_values.values[rect.cell_slices(t_values.L)].ravel()
        m = math.floor(block.size * frac) + 1
        q = np.partition(block, block.size - m)[block.size - m]
        if q > threshold:
            return False
    return True


# ---------------------------------------------------------------------------
# Exceptional sets
# ---------------------------------------------------------------------------


@dataclass
class DecompositionState:
    kappa: float
    nu: float
    p1: float
    p2: float
    t0_spec: OperatorSpec
    t_values: tuple  # governing operator outputs used to build the sets
    omega_ell: dict  # level index -> boolean grid
    omega: np.ndarray
    omega_tilde: np.ndarray
    labels: dict = dc_field(default_factory=dict)
    lambdas: dict = dc_field(default_factory=dict)
    good_set: Optional[np.ndarray] = None

    @property
    def omega_measure(self) -> float:
        return float(self.omega.mean())

    @property
    def omega_tilde_measure(self) -> float:
        return float(self.omega_tilde.mean())


def _omega_sets(t_values, kappa, nu, t0_spec):
    """Level sets of the operator data and their maximal inflation."""
    grid_shape = t_values[0].values.shape
    top = max(float(t.values.max()) for t in t_values)
    omega_ell = {}
    ell = 0
    while kappa * 2.0**ell < top:
        mask = np.zeros(grid_shape, dtype=bool)
        for t in t_values:
            mask |= t.values > kappa * 2.0**ell
        if not mask.any():
            break
        omega_ell[ell] = mask
        ell += 1
    omega = np.zeros(grid_shape, dtype=bool)
    for ell, mask in omega_ell.items():
        inflated = governing_operator(Signal.from_mask(mask), t0_spec)
        omega |= inflated.values > OMEGA_FRACTION * 2.0 ** (-nu * ell)
    if omega.any():
        spread = governing_operator(Signal.from_mask(omega), t0_spec)
        omega_tilde = spread.values > 0.5
    else:
        omega_tilde = np.zeros(grid_shape, dtype=bool)
    return omega_ell, omega, omega_tilde


def build_exceptional_sets(
    f1: Signal,
    f2: Signal,
    p1: float,
    p2: float,
    t1: OperatorSpec,
    t2: Optional[OperatorSpec],
    t0_spec: Optional[OperatorSpec] = None,
    kappa: Optional[float] = None,
    kappa_limit: float = KAPPA_LIMIT,
) -> DecompositionState:
    """Calibrate kappa by doubling from 1 until the inflated exceptional
    set covers less than half the torus and return all level-set data.

    Passing t2=None builds the sets from the first input alone (the
    bounded-second-input endpoint variant).
    """
    nu = min(p1, p2) / 4.0
    if t0_spec is None:
        t0_spec = OperatorSpec.all_max(AdaptedFamily.abs_haar(f1.d))
    t_list = [governing_operator(f1, t1)]
    if t2 is not None:
        t_list.append(governing_operator(f2, t2))

    def state_at(k):
        omega_ell, omega, omega_tilde = _omega_sets(t_list, k, nu, t0_spec)
        return DecompositionState(
            kappa=k,
            nu=nu,
            p1=p1,
            p2=p2,
            t0_spec=t0_spec,
            t_values=tuple(t_list),
            omega_ell=omega_ell,
            omega=omega,
            omega_tilde=omega_tilde,
        )

    if kappa is not None:
        return state_at(float(kappa))
    k = 1.0
    while k <= kappa_limit:
        state = state_at(k)
        if state.omega_tilde_measure < 0.5:
            return state
        k *= 2.0
    raise CalibrationError(
        f"no kappa <= {kappa_limit} shrinks the exceptional set below 1/2"
    )


# ---------------------------------------------------------------------------
# Sum over a collection and the principal summation bounds
# ---------------------------------------------------------------------------


def sum_over(collection: RectangleCollection, spec: ParaproductSpec, f1, f2, f3) -> float:
    """sum_{R in O} |R| prod_v |<f_v, phi_(v,R)>| / sqrt(|R|)."""
    if spec.n != 2:
        raise ContractError("sum_over is defined for the bilinear form")
    return eval_Lambda(spec, (f1, f2, f3), collection=collection)


def _conclusion_bound(
    holding,
    lambdas,
    shadow: float,
    restricted_norms: dict,
) -> tuple:
    """Explicit-constant bound given which hypotheses hold.

    m holding hypotheses remove m bad sets of fraction 1/100 each, leaving
    a good fraction (100 - m)/100 of every rectangle; each failing slot
    contributes its restricted L^2 norm through one Cauchy-Schwarz, and
    the shadow enters to the power 1, 1/2, or 0 as the number of failing
    slots grows from 0 to 2.
    """
    m = len(holding)
    if m == 0:
        raise ContractError("at least one hypothesis must hold")
    failing = [j for j in range(3) if j not in holding]
    constant = 100.0 / (100.0 - m)
    bound = constant
    for j in holding:
        bound *= lambdas[j]
    if len(failing) == 0:
        bound *= shadow
        kind = "all-hold"
    elif len(failing) == 1:
        bound *= math.sqrt(shadow) * restricted_norms[failing[0]]
        kind = "one-fails"
    elif len(failing) == 2:
        bound *= restricted_norms[failing[0]] * restricted_norms[failing[1]]
        kind = "two-fail"
    else:
        raise ContractError("no bound is available when every hypothesis fails")
    return bound, constant, kind


def technical_lemma_check(
    collection: RectangleCollection,
    spec: ParaproductSpec,
    fs,
    lambdas,
    hypothesis_flags,
    op_specs=None,
    frac: float = FRACTION,
    tol: float = 1e-10,
) -> dict:
    """Verify the summation bound selected by the hypothesis pattern.

    The flags state, per slot, whether |R cut {T_j f_j > lambda_j}| stays
    below |R|/100 for every member; they are re-measured here and any
    mismatch is a contract error.  The applicable conclusion then bounds
    Sum(collection) by the explicit constant 100/(100 - #holding) times
    the held thresholds and, per failing slot, a restricted L^2 norm.
    """
    if len(fs) != 3 or len(lambdas) != 3 or len(hypothesis_flags) != 3:
        raise ContractError("the bilinear lemma takes three slots")
    ops = tuple(op_specs) if op_specs is not None else slot_operator_specs(spec)[:3]
    t_vals = [governing_operator(f, op) for f, op in zip(fs, ops)]
    measured = tuple(
        hypothesis_holds(t, collection, lam, frac) for t, lam in zip(t_vals, lambdas)
    )
    if measured != tuple(bool(b) for b in hypothesis_flags):
        raise ContractError(
            f"hypothesis flags {tuple(hypothesis_flags)} disagree with "
            f"measured level sets {measured}"
        )
    holding = [j for j in range(3) if measured[j]]
    failing = [j for j in range(3) if not measured[j]]
    shadow = collection.shadow_measure()
    restricted_norms = {
        j: lp_norm(restricted_operator(fs[j], ops[j], collection), 2.0)
        for j in failing
    }
    total = sum_over(collection, spec, *fs)
    bound, constant, kind = _conclusion_bound(holding, lambdas, shadow, restricted_norms)

    shadow_mask = collection.shadow_mask() if len(collection) else None
    good = None
    if shadow_mask is not None:
        good = shadow_mask.copy()
        for j in holding:
            good &= t_vals[j].values <= lambdas[j]
    return {
        "conclusion": kind,
        "constant": constant,
        "sum": total,
        "bound": bound,
        "margin": bound - total,
        "ok": total <= bound * (1.0 + tol) + 1e-300,
        "shadow": shadow,
        "holding": holding,
        "restricted_norms": restricted_norms,
        "good_set_measure": None if good is None else float(good.mean()),
    }


# ---------------------------------------------------------------------------
# Localization experiments
# ---------------------------------------------------------------------------


def one_sided_support_builder(L: int, level: Optional[int] = None):
    """Default d=1 scenario: one centered interval, data far to its right.

    Returns a builder mapping mu to (collection, signal) where the signal
    is the indicator of all cells beyond the outward-rounded mu-dilation,
    taken one-sided so odd profile tails cannot cancel.
    """
    k = max(2, L // 2) if level is None else level
    rect = DyadicRectangle((DyadicInterval(k, 1 << (k - 1)),))
    collection = RectangleCollection.of([rect], L)

    def build(mu: float):
        box = dilate(rect, mu, L)
        n = 1 << L
        values = np.zeros(n)
        lo, hi = box.ranges[0]
        if hi < n:
            values[hi:] = 1.0
        else:
            values[:lo] = 1.0
        return collection, Signal(1, L, values)

    return build


def localization_experiment(
    op_spec: OperatorSpec,
    mus,
    L: int,
    builder=None,
) -> dict:
    """Restricted-operator decay against the dilation factor.

    For every mu the builder must produce a collection and a signal whose
    support misses the mu-dilation of each member (checked; violations are
    contract errors).  Reports ||T_O f||_2 / ||f||_2 per mu and the fitted
    log2-log2 slope; families with compactly supported profiles come out
    identically zero.
    """
    if builder is None:
        if op_spec.d != 1:
            raise ContractError("the default builder is one-parameter")
        builder = one_sided_support_builder(L)
    entries = []
    for mu in mus:
        collection, f = builder(mu)
        for rect in collection.members:
            box = dilate(rect, mu, L)
            region = f.values[box.slices()]
            if region.size and np.any(region != 0.0):
                raise ContractError(
                    f"support overlaps the {mu}-dilation of {rect.to_json()}"
                )
        norm = lp_norm(restricted_operator(f, op_spec, collection), 2.0)
        denom = lp_norm(f, 2.0)
        entries.append(
            {"mu": mu, "norm": norm, "ratio": norm / denom if denom else 0.0}
        )
    xs = [math.log2(e["mu"]) for e in entries if e["ratio"] > 0.0]
    ys = [math.log2(e["ratio"]) for e in entries if e["ratio"] > 0.0]
    slope = None
    if len(xs) >= 2:
        slope = float(np.polyfit(xs, ys, 1)[0])
    return {
        "entries": entries,
        "slope": slope,
        "all_zero": all(e["ratio"] == 0.0 for e in entries),
    }


def shadow_layer_decay(
    op_spec: OperatorSpec,
    collection: RectangleCollection,
    f: Signal,
    t0_spec: Optional[OperatorSpec] = None,
    max_layers: Optional[int] = None,
) -> dict:
    """Layered restricted norms against the shadow measure.

    Splits a bounded f into layers along the level sets of the maximal
    function of the shadow indicator (thresholds 2^-1, 2^-2, ...) and
    reports sum_k ||T_O f_k||_2 against |sh(O)|^(1/2) ||f||_inf.
    """
    if t0_spec is None:
        t0_spec = OperatorSpec.all_max(AdaptedFamily.abs_haar(f.d))
    shadow_mask = collection.shadow_mask()
    shadow = collection.shadow_measure()
    if shadow == 0.0:
        return {"layers": [], "total": 0.0, "ratio": 0.0, "shadow": 0.0}
    spread = governing_operator(Signal.from_mask(shadow_mask), t0_spec).values
    cap = max_layers if max_layers is not None else 4 * f.L + 8
    layers = []
    prev = np.zeros_like(shadow_mask)
    total = 0.0
    for k in range(cap + 1):
        mask = spread > 2.0 ** (-1 - k)
        ring = mask & ~prev
        prev = mask
        if ring.any():
            fk = f.restrict(ring)
            nk = lp_norm(restricted_operator(fk, op_spec, collection), 2.0)
            layers.append({"k": k, "norm": nk, "measure": float(ring.mean())})
            total += nk
        if mask.all():
            break
    sup = lp_norm(f, np.inf)
    denom = math.sqrt(shadow) * sup
    return {
        "layers": layers,
        "total": total,
        "shadow": shadow,
        "ratio": total / denom if denom else 0.0,
    }


# ---------------------------------------------------------------------------
# Restricted-weak-type pipelines
# ---------------------------------------------------------------------------


@dataclass
class RestrictedWeakConfig:
    p1: float
    p2: float
    e3_mask: Optional[np.ndarray] = None  # None means the full torus
    f3: Optional[Signal] = None  # bounded profile; defaults to 1
    kappa: Optional[float] = None
    clamp: int = DEFAULT_CLAMP
    tol: float = 1e-10


def _effective(label: Optional[int], clamp: int) -> int:
    return -clamp if label is None else label


def _group_classes(labels_list, lattice, clamp, leading: int):
    """Split rectangles into main classes (all `leading` front labels <= 0,
    keyed by the full label vector) and leftover classes keyed by the front
    labels whenever one of them is positive."""
    main, leftover = {}, {}
    for rect in lattice:
        ells = tuple(_effective(lab[rect], clamp) for lab in labels_list)
        if all(e <= 0 for e in ells[:leading]):
            main.setdefault(ells, []).append(rect)
        else:
            leftover.setdefault(ells[:leading], []).append(rect)
    return main, leftover


def restricted_weak_type_pipeline(
    cfg: RestrictedWeakConfig,
    spec: ParaproductSpec,
    f1: Signal,
    f2: Signal,
) -> dict:
    """Full decomposition run for normalized inputs on the unit torus.

    Requires ||f1||_p1 = ||f2||_p2 = 1 and |E_3| = 1.  Builds the
    exceptional sets, restricts the third input to the complement of the
    inflated set, classifies every rectangle, and checks the explicit
    summation bound of each class.  Returns the per-class table, the total
    mass, and the duality pairing comparisons.
    """
    if spec.n != 2 or spec.d != f1.d:
        raise ContractError("pipeline needs a bilinear spec matching the inputs")
    for f, p, name in ((f1, cfg.p1, "f1"), (f2, cfg.p2, "f2")):
        nrm = lp_norm(f, p)
        if abs(nrm - 1.0) > 1e-8:
            raise ContractError(f"{name} must be normalized in L^{p}; got {nrm}")
    d, L = f1.d, f1.L
    e3 = (
        np.ones(((1 << L),) * d, dtype=bool)
        if cfg.e3_mask is None
        else np.asarray(cfg.e3_mask, dtype=bool)
    )
    if float(e3.mean()) != 1.0:
        raise ContractError("E_3 must have measure one (the full torus)")

    t1, t2, t3 = slot_operator_specs(spec)[:3]
    state = build_exceptional_sets(f1, f2, cfg.p1, cfg.p2, t1, t2, kappa=cfg.kappa)
    kappa = state.kappa
    if state.omega_tilde_measure >= 0.5:
        raise CalibrationError("inflated exceptional set still covers half the torus")

    e3_prime = e3 & ~state.omega_tilde
    base = cfg.f3 if cfg.f3 is not None else Signal.constant(d, L, 1.0)
    f3 = Signal(d, L, np.clip(base.values, -1.0, 1.0)).restrict(e3_prime)

    labels1 = classify_rectangles(f1, t1, kappa, clamp=cfg.clamp, values=state.t_values[0])
    labels2 = classify_rectangles(f2, t2, kappa, clamp=cfg.clamp, values=state.t_values[1])
    labels3 = classify_rectangles(f3, t3, kappa, clamp=cfg.clamp)
    state.labels = {1: labels1, 2: labels2, 3: labels3}
    lattice = lattice_rectangles(d, L)
    main, leftover = _group_classes(
        [labels1, labels2, labels3], lattice, cfg.clamp, leading=2
    )

    rows = []
    all_ok = True
    total_parts = []
    for ells, rects in sorted(main.items()):
        collection = RectangleCollection.of(rects, L)
        lambdas = tuple(kappa * 2.0 ** (e + 1) for e in ells)
        state.lambdas[ells] = lambdas
        check = technical_lemma_check(
            collection, spec, (f1, f2, f3), lambdas, (True, True, True),
            op_specs=(t1, t2, t3), tol=cfg.tol,
        )
        row = {
            "class": "main",
            "labels": list(ells),
            "size": len(rects),
            "sum": check["sum"],
            "shadow": check["shadow"],
            "bound": check["bound"],
            "margin": check["margin"],
            "ok": check["ok"],
            "shadow_reference": min(
                2.0 ** (-cfg.p1 * ells[0]), 2.0 ** (-cfg.p2 * ells[1])
            ),
        }
        rows.append(row)
        all_ok &= check["ok"]
        total_parts.append(check["sum"])

    for ells, rects in sorted(leftover.items()):
        collection = RectangleCollection.of(rects, L)
        lambdas = tuple(kappa * 2.0 ** (e + 1) for e in ells)
        t3_norm = lp_norm(restricted_operator(f3, t3, collection), 2.0)
        shadow = collection.shadow_measure()
        for j, (tv, lam) in enumerate(zip(state.t_values, lambdas)):
            if not hypothesis_holds(tv, collection, lam):
                raise ContractError(
                    f"leading hypothesis {j + 1} fails on leftover class {ells}"
                )
        total = sum_over(collection, spec, f1, f2, f3)
        bound = (100.0 / 98.0) * lambdas[0] * lambdas[1] * math.sqrt(shadow) * t3_norm
        ok = total <= bound * (1.0 + cfg.tol) + 1e-300
        rows.append(
            {
                "class": "leftover",
                "labels": list(ells),
                "size": len(rects),
                "sum": total,
                "shadow": shadow,
                "bound": bound,
                "margin": bound - total,
                "ok": ok,
                "restricted_t3_norm": t3_norm,
            }
        )
        all_ok &= ok
        total_parts.append(total)

    total = math.fsum(total_parts)
    whole = eval_Lambda(spec, (f1, f2, f3))
    b_out = eval_B(spec, (f1, f2))
    pairing = abs(
        float(np.sum(b_out.values * f3.values)) * f1.cell_measure
    )
    pairing_abs = float(np.sum(np.abs(b_out.values) * np.abs(f3.values))) * f1.cell_measure
    # absolute slack for cancellation dust when the pairing is near zero
    slack = cfg.tol * max(total, lp_norm(b_out, 1.0), 1.0)

    return {
        "kappa": kappa,
        "nu": state.nu,
        "omega_measure": state.omega_measure,
        "omega_tilde_measure": state.omega_tilde_measure,
        "e3_prime_measure": float(e3_prime.mean()),
        "e3_prime_convention": "complement-of-inflated-set",
        "classes": rows,
        "total": total,
        "partition_defect": abs(total - whole),
        "pairing": pairing,
        "pairing_le_total": pairing <= total + slack,
        "pairing_abs": pairing_abs,
        "pairing_abs_le_total": pairing_abs <= total + slack,
        "all_class_bounds_ok": bool(all_ok),
        "finite": bool(np.isfinite(total)),
    }


def endpoint_pipeline(
    cfg: RestrictedWeakConfig,
    spec: ParaproductSpec,
    f1: Signal,
    f2: Signal,
) -> dict:
    """Bounded-second-input variant: ||f2||_inf = 1 replaces the L^p2
    normalization, the exceptional sets are built from the first input
    alone, and the second slot enters every bound through its restricted
    L^2 norm, reported also as a multiple of |sh|^(1/2) ||f2||_inf.
    """
    if spec.n != 2 or spec.d != f1.d:
        raise ContractError("pipeline needs a bilinear spec matching the inputs")
    if abs(lp_norm(f1, cfg.p1) - 1.0) > 1e-8:
        raise ContractError("f1 must be normalized in L^p1")
    sup2 = lp_norm(f2, np.inf)
    if abs(sup2 - 1.0) > 1e-8:
        raise ContractError("f2 must be normalized in L^inf")
    d, L = f1.d, f1.L

    t1, t2, t3 = slot_operator_specs(spec)[:3]
    state = build_exceptional_sets(
        f1, f2, cfg.p1, float("inf"), t1, None, kappa=cfg.kappa
    )
    kappa = state.kappa
    if state.omega_tilde_measure >= 0.5:
        raise CalibrationError("inflated exceptional set still covers half the torus")

    e3 = (
        np.ones(((1 << L),) * d, dtype=bool)
        if cfg.e3_mask is None
        else np.asarray(cfg.e3_mask, dtype=bool)
    )
    if float(e3.mean()) != 1.0:
        raise ContractError("E_3 must have measure one (the full torus)")
    e3_prime = e3 & ~state.omega_tilde
    base = cfg.f3 if cfg.f3 is not None else Signal.constant(d, L, 1.0)
    f3 = Signal(d, L, np.clip(base.values, -1.0, 1.0)).restrict(e3_prime)

    t3_values = governing_operator(f3, t3)
    labels1 = classify_rectangles(f1, t1, kappa, clamp=cfg.clamp, values=state.t_values[0])
    labels3 = classify_rectangles(f3, t3, kappa, clamp=cfg.clamp, values=t3_values)
    state.labels = {1: labels1, 3: labels3}
    lattice = lattice_rectangles(d, L)
    main, leftover = _group_classes([labels1, labels3], lattice, cfg.clamp, leading=1)

    rows = []
    all_ok = True
    total_parts = []
    localization_constants = []
    for key, rects in sorted(list(main.items()) + list(leftover.items())):
        is_main = key in main
        collection = RectangleCollection.of(rects, L)
        shadow = collection.shadow_measure()
        t2_norm = lp_norm(restricted_operator(f2, t2, collection), 2.0)
        if shadow > 0:
            localization_constants.append(t2_norm / (math.sqrt(shadow) * sup2))
        total = sum_over(collection, spec, f1, f2, f3)
        lam1 = kappa * 2.0 ** (key[0] + 1)
        if not hypothesis_holds(state.t_values[0], collection, lam1):
            raise ContractError(f"first-slot hypothesis fails on class {key}")
        if is_main:
            ell3 = key[1]
            lam3 = kappa * 2.0 ** (ell3 + 1)
            if not hypothesis_holds(t3_values, collection, lam3):
                raise ContractError(f"third-slot hypothesis fails on class {key}")
            bound = (100.0 / 98.0) * lam1 * lam3 * math.sqrt(shadow) * t2_norm
        else:
            t3_norm = lp_norm(restricted_operator(f3, t3, collection), 2.0)
            bound = (100.0 / 99.0) * lam1 * t2_norm * t3_norm
        ok = total <= bound * (1.0 + cfg.tol) + 1e-300
        rows.append(
            {
                "class": "main" if is_main else "leftover",
                "labels": list(key),
                "size": len(rects),
                "sum": total,
                "shadow": shadow,
                "bound": bound,
                "margin": bound - total,
                "ok": ok,
                "restricted_t2_norm": t2_norm,
            }
        )
        all_ok &= ok
        total_parts.append(total)

    total = math.fsum(total_parts)
    whole = eval_Lambda(spec, (f1, f2, f3))
    return {
        "kappa": kappa,
        "nu": state.nu,
        "omega_tilde_measure": state.omega_tilde_measure,
        "e3_prime_measure": float(e3_prime.mean()),
        "e3_prime_convention": "complement-of-inflated-set",
        "classes": rows,
        "total": total,
        "partition_defect": abs(total - whole),
        "all_class_bounds_ok": bool(all_ok),
        "max_localization_constant": max(localization_constants, default=0.0),
        "finite": bool(np.isfinite(total)),
    }
