"""The alternating atoms-in-molecules engine and its six pro-atom strategies.

One iteration of the generic scheme:

* Step 1 (explicit): stockholder allocation. Each atom receives
  rho_a(r) = [w_a(|r|) / sum_b w_b(|r - R_b + R_a|)] * rho(R_a + r), with
  the 0/0 -> 0 convention where the pro-molecule vanishes.
* Step 2 (method-specific): refit each atom's radial pro-atom to its current
  share under the charge constraint.

The total relative entropy S = sum_a s_KL(rho_a | rho_a^0) is recorded every
iteration; for ISA and L-ISA it must not increase (it is a Lyapunov function
of the exact iteration), and a rise beyond slack aborts the run because it
can only come from a quadrature or solver defect.
"""

import math
import time
import warnings
from dataclasses import dataclass, field

import numpy as np

from .density import total_charge
from .errors import EntropyIncreaseError, ValidationError
from .grids import AtomicGridSet, integrate_atom, spherical_average
from .moments import atomic_moments
from .proatoms import (
    GaussianExpansion,
    HirshfeldITable,
    SlaterShells,
    TabulatedProfile,
    default_exponents,
    default_shell_count,
)
from .solvers import QpProblem, SimplexProblem, solve_qp_nonneg, solve_simplex_newton

__all__ = [
    "METHODS",
    "PartitionOptions",
    "PartitionState",
    "PartitionResult",
    "stockholder_allocate",
    "hirshfeld",
    "isa_step2",
    "hirshfeld_i_step2",
    "lisa_step2",
    "gisa_step2",
    "mbisa_update",
    "kl_entropy",
    "run_partition",
]

METHODS = ("hirshfeld", "hirshfeld-i", "isa", "gisa", "lisa", "mbisa")

ENTROPY_SLACK = 1e-8
LOST_CHARGE_WARN = 1e-6


@dataclass
class PartitionOptions:
    tol: float = 1e-8
    tol_l2: float = 1e-8
    max_iter: int = 500
    isa_guess_exponent: float = 2.0
    shells: list = None          # per-atom shell counts (gisa/lisa/mbisa)
    exponents: list = None       # per-atom exponent lists (gisa/lisa/mbisa)
    init_coefficients: str | list = "balanced"   # or "delta:k0" or explicit arrays
    proatom_tables: dict = None  # hirshfeld: {atom: TabulatedProfile};
                                 # hirshfeld-i: {atom: HirshfeldITable}
    record_entropy: bool = True


@dataclass
class PartitionState:
    iteration: int
    pro_models: list
    charges: np.ndarray
    entropy: float
    step_norms: np.ndarray  # per-atom L2 norms |rho_a^(m) - rho_a^(m-1)|


@dataclass
class PartitionResult:
    method: str
    converged: bool
    iterations: int
    charges: np.ndarray            # N_a
    dipoles: np.ndarray            # (M, 3) about each atom
    second_moments: np.ndarray     # (M, 3, 3)
    profiles: list                 # per atom (radial nodes, w_a values)
    pro_models: list
    entropy_trace: list
    charge_history: list           # per-iteration N_a arrays
    l2_step_sq_history: list       # per-iteration sum_a |drho_a|_L2^2
    density_sup: float
    lost_charge: float
    elapsed_seconds: float
    messages: list = field(default_factory=list)


class StockholderEngine:
    """Evaluates stockholder shares on a fixed grid set.

    Geometry-dependent distance tables come from the grid set; the normalized
    shell profiles of Gaussian/Slater expansions are cached per (atom pair,
    exponent tuple) so that iterations with fixed exponents only pay for a
    coefficient contraction.
    """

    def __init__(self, grids: AtomicGridSet):
        if grids.samples is None:
            raise ValueError("grid set has no cached density samples")
        self.grids = grids
        self._basis_cache = {}

    def _profile_values(self, model, a, b):
        dists = self.grids.distances(a, b)
        if isinstance(model, (GaussianExpansion, SlaterShells)):
            key = (a, b, type(model).__name__)
            cached = self._basis_cache.get(key)
            if cached is None or cached[0] != model.exponents:
                cached = (model.exponents, model.basis_profiles(dists))
                self._basis_cache[key] = cached
            return np.tensordot(model.coefficients, cached[1], axes=1)
        return model.profile(dists)

    def promolecule(self, pro_models, a):
        """sum_b w_b(|r - R_b + R_a|) on atom a's grid."""
        total = None
        for b, model in enumerate(pro_models):
            vals = self._profile_values(model, a, b)
            total = vals.copy() if total is None else total + vals
        return total

    def allocate(self, pro_models):
        """Stockholder shares of the cached density for the given pro-atoms.

        Returns (shares, lost_charge): per-atom sample arrays, plus the
        charge sitting where the pro-molecule vanishes but the density does
        not (allocated to nobody by the 0/0 convention).
        """
        shares = []
        lost = 0.0
        for a in range(self.grids.natom):
            rho = self.grids.samples[a]
            own = self._profile_values(pro_models[a], a, a)
            denom = self.promolecule(pro_models, a)
            with np.errstate(invalid="ignore", divide="ignore"):
                share = np.where(denom > 0.0, own / np.where(denom > 0, denom, 1.0), 0.0) * rho
            shares.append(share)
            dead = (denom <= 0.0) & (rho > 0.0)
            if np.any(dead):
                lost = max(lost, integrate_atom(self.grids, a, np.where(dead, rho, 0.0)))
        return shares, lost


def stockholder_allocate(pro_models, grids):
    """One explicit Step-1 pass; see StockholderEngine.allocate."""
    return StockholderEngine(grids).allocate(pro_models)


def kl_entropy(samples, pro_model, grids, atom):
    """s_KL(rho_a | rho_a^0) on one atom's grid, honoring the 0-conventions.

    Points with rho_a = 0 contribute nothing; a set of positive weight with
    rho_a > 0 but a vanishing pro-atom makes the divergence +inf.
    """
    rho = np.asarray(samples, dtype=float)
    w0 = pro_model.profile(grids.distances(atom, atom))
    pos = rho > 0.0
    if np.any(pos & (w0 <= 0.0)):
        return math.inf
    integrand = np.zeros_like(rho)
    integrand[pos] = rho[pos] * np.log(rho[pos] / w0[pos])
    return integrate_atom(grids, atom, integrand)


def _charges(grids, shares):
    return np.array([integrate_atom(grids, a, shares[a]) for a in range(grids.natom)])


def isa_step2(samples, grids, atom):
    """Spherical average of the share, tabulated on the atom's radial nodes."""
    radial = grids.radial[atom]
    w = spherical_average(np.asarray(samples, dtype=float), grids.angular[atom])
    return TabulatedProfile(nodes=radial.nodes, values=np.maximum(w, 0.0),
                            rmax=radial.rmax)


def hirshfeld_i_step2(N_a, table):
    """Pro-atom for the current fractional electron count (see HirshfeldITable)."""
    return table.interpolated(N_a)


def lisa_step2(w_nodes, w_values, weights, N_a, exponents, start=None):
    """KL-optimal nonnegative Gaussian expansion of a radial profile.

    Minimizes F(c) = -int r^2 w(r) log(sum_k c_k g_k(r)) dr over the simplex
    {c >= 0, sum c = N_a}, where g_k are the normalized Gaussian shells. The
    integral is discretized with the supplied radial quadrature weights.
    """
    if N_a <= 0:
        return GaussianExpansion(exponents=exponents, coefficients=np.zeros(len(exponents)))
    r = np.asarray(w_nodes, dtype=float)
    w = np.asarray(w_values, dtype=float)
    quad = np.asarray(weights, dtype=float) * r**2 * w
    basis = GaussianExpansion(exponents=exponents,
                              coefficients=np.ones(len(exponents))).basis_profiles(r)

    def objective(c):
        mix = c @ basis
        if np.any(mix[quad > 0] <= 0.0):
            return math.inf
        out = np.zeros_like(mix)
        mask = quad != 0.0
        out[mask] = quad[mask] * np.log(mix[mask])
        return -float(np.sum(out))

    def gradient(c):
        mix = np.where(c @ basis > 0, c @ basis, 1.0)
        return -basis @ (quad / mix)

    def hessian(c):
        mix = np.where(c @ basis > 0, c @ basis, 1.0)
        return (basis * (quad / mix**2)) @ basis.T

    problem = SimplexProblem(dim=len(exponents), mass=float(N_a),
                             objective=objective, gradient=gradient, hessian=hessian)
    c = solve_simplex_newton(problem, start=start)
    return GaussianExpansion(exponents=exponents, coefficients=np.maximum(c, 0.0))


def gisa_overlap(exponents):
    """[S]_kl = 2 int zeta_k zeta_l = (2/pi^{3/2}) (a_k a_l)^{3/2} (a_k+a_l)^{-3/2}."""
    a = np.asarray(exponents, dtype=float)
    num = (a[:, None] * a[None, :]) ** 1.5
    den = (a[:, None] + a[None, :]) ** 1.5
    return 2.0 / math.pi**1.5 * num / den


def gisa_step2(samples, grids, atom, N_a, exponents, start=None):
    """L2-optimal nonnegative Gaussian expansion of the share (a small QP).

    Minimizes |sum_k c_k zeta_k - rho_a|_L2^2 over {c >= 0, sum c = N_a},
    i.e. 1/2 c^T S c - c^T b with the closed-form overlaps S = 2 int zeta zeta
    and b_k = 2 int zeta_k rho_a from the atomic quadrature. An
    ill-conditioned overlap is regularized on the diagonal by 1e-12 and the
    regularization is reported in the returned flags.
    """
    S = gisa_overlap(exponents)
    messages = []
    cond = np.linalg.cond(S)
    if cond > 1e14:
        S = S + 1e-12 * np.eye(len(exponents))
        messages.append(f"ill-conditioned shell overlap (cond {cond:.1e}); "
                        "diagonal regularized by 1e-12")
    radial = grids.radial[atom]
    w = spherical_average(np.asarray(samples, dtype=float), grids.angular[atom])
    wr = 4.0 * math.pi * radial.weights * radial.nodes**2 * w
    zeta = GaussianExpansion(exponents=exponents,
                             coefficients=np.ones(len(exponents))).basis_profiles(radial.nodes)
    b = 2.0 * (zeta @ wr)
    c = solve_qp_nonneg(QpProblem(S=S, b=b, mass=float(N_a)), start=start)
    return GaussianExpansion(exponents=exponents, coefficients=np.maximum(c, 0.0)), messages


def mbisa_update(pro_models, grids, shell_floor=1e-12):
    """Explicit shell update: c_k = shell share charge, a_k = 3 c_k / <|r|>.

    Shares are stockholder weights of the individual Slater shells against
    the full pro-molecule. A shell whose charge underflows is frozen at zero
    (its exponent kept) and reported.
    """
    engine = StockholderEngine(grids)
    messages = []
    new_models = []
    for a, model in enumerate(pro_models):
        if not isinstance(model, SlaterShells):
            raise ValueError("mbisa_update requires SlaterShells pro-atoms")
        rho = grids.samples[a]
        denom = engine.promolecule(pro_models, a)
        r_own = grids.distances(a, a)
        with np.errstate(invalid="ignore", divide="ignore"):
            base = np.where(denom > 0.0, rho / np.where(denom > 0, denom, 1.0), 0.0)
        shells = model.basis_profiles(r_own)
        new_c = np.empty(len(model.exponents))
        new_a = np.array(model.exponents, dtype=float)
        for k, ck in enumerate(model.coefficients):
            share = ck * shells[k] * base
            c_new = integrate_atom(grids, a, share)
            if c_new < shell_floor:
                if ck != 0.0:
                    messages.append(
                        f"atom {a} shell {k}: charge underflow ({c_new:.1e}); frozen at 0")
                new_c[k] = 0.0
                continue
            moment1 = integrate_atom(grids, a, share * r_own)
            new_c[k] = c_new
            new_a[k] = 3.0 * c_new / moment1
        new_models.append(SlaterShells(exponents=tuple(new_a), coefficients=new_c))
    return new_models, messages


def hirshfeld(rho, grids, proatoms, record_entropy=True):
    """Non-iterative stockholder split against fixed neutral pro-atoms."""
    opts = PartitionOptions(max_iter=1, proatom_tables=proatoms,
                            record_entropy=record_entropy)
    return run_partition("hirshfeld", rho, grids, opts)


def _init_models(method, Z, grids, opts, N_total):
    M = grids.natom
    if method == "hirshfeld":
        tables = opts.proatom_tables or {}
        missing = [a for a in range(M) if a not in tables]
        if missing:
            raise ValidationError([f"missing pro-atom table for atom {a}" for a in missing])
        return [tables[a] for a in range(M)]
    if method == "hirshfeld-i":
        tables = opts.proatom_tables or {}
        missing = [a for a in range(M) if a not in tables]
        if missing:
            raise ValidationError([f"missing pro-atom table set for atom {a}" for a in missing])
        # initial charges proportional to Z, rescaled so they sum to N
        scale = N_total / sum(Z)
        return [tables[a].interpolated(Z[a] * scale) for a in range(M)]
    if method == "isa":
        alpha = opts.isa_guess_exponent
        models = []
        for a in range(M):
            nodes = grids.radial[a].nodes
            values = Z[a] * alpha**3 / (8.0 * math.pi) * np.exp(-alpha * nodes)
            models.append(TabulatedProfile(nodes=nodes, values=values,
                                           rmax=grids.radial[a].rmax))
        return models
    # expansion methods share the shell setup
    shells = opts.shells or [default_shell_count(z) for z in Z]
    if len(shells) != M:
        raise ValidationError(["need one shell count per atom"])
    exponents = opts.exponents or [default_exponents(Z[a], shells[a]) for a in range(M)]
    if len(exponents) != M:
        raise ValidationError(["need one exponent list per atom"])
    problems = [f"atom {a}: {shells[a]} shells but {len(exponents[a])} exponents"
                for a in range(M) if len(exponents[a]) != shells[a]]
    if problems:
        raise ValidationError(problems)
    coeffs = []
    for a in range(M):
        init = opts.init_coefficients
        if isinstance(init, str) and init == "balanced":
            c = np.full(shells[a], Z[a] / shells[a])
        elif isinstance(init, str) and init.startswith("delta:"):
            k0 = int(init.split(":", 1)[1])
            c = np.zeros(shells[a])
            c[k0] = Z[a]
        else:
            c = np.asarray(init[a], dtype=float)
            if c.size != shells[a]:
                raise ValidationError([f"atom {a}: initial guess has {c.size} entries "
                                       f"for {shells[a]} shells"])
        coeffs.append(c)
    cls = SlaterShells if method == "mbisa" else GaussianExpansion
    return [cls(exponents=tuple(exponents[a]), coefficients=coeffs[a]) for a in range(M)]


def run_partition(method, rho, grids, options=None, Z=None):
    """Alternate Step 1 / Step 2 for the chosen method until convergence.

    `rho` is a density model (used for its exact total charge); the grid set
    must already hold its samples. `Z` gives per-atom pro-atom masses for the
    initial guess (defaults to 1 per atom for synthetic densities).

    Convergence requires both max_a |N_a change| < tol and
    max_a ||rho_a change||_L2 < tol_l2. Non-convergence returns a result
    flagged converged=False; an entropy increase beyond slack for ISA/L-ISA
    raises EntropyIncreaseError.
    """
    if method not in METHODS:
        raise ValidationError([f"unknown method {method!r}; choose from {METHODS}"])
    opts = options or PartitionOptions()
    if grids.samples is None:
        grids.sample_density(rho.eval)
    M = grids.natom
    if Z is None:
        Z = [1] * M
    for a in range(M):
        if grids.angular[a].kind == "axial" and not grids.axis_aligned():
            raise ValidationError(["axial angular grids require all atoms on the z axis"])

    t0 = time.time()
    engine = StockholderEngine(grids)
    N_total = total_charge(rho)
    pro_models = _init_models(method, Z, grids, opts, N_total)
    density_sup = max(float(np.max(s)) for s in grids.samples)

    prev_shares = None
    state = PartitionState(
        iteration=0, pro_models=pro_models,
        charges=np.array([float(m.charge()) if hasattr(m, "charge") else math.nan
                          for m in pro_models]),
        entropy=math.inf, step_norms=np.full(M, math.inf))
    entropy_trace = []
    charge_history = []
    l2_hist = []
    messages = []
    lost_worst = 0.0
    converged = False

    max_iter = 1 if method == "hirshfeld" else opts.max_iter
    for m_iter in range(1, max_iter + 1):
        # Step 1: explicit stockholder allocation
        shares, lost = engine.allocate(pro_models)
        lost_worst = max(lost_worst, lost)
        charges = _charges(grids, shares)
        charge_history.append(charges)

        # step norms against the previous allocation
        if prev_shares is not None:
            norms_sq = np.array([integrate_atom(grids, a, (shares[a] - prev_shares[a]) ** 2)
                                 for a in range(M)])
        else:
            norms_sq = np.full(M, math.inf)
        l2_hist.append(float(np.sum(norms_sq)))

        # Step 2: method-specific pro-atom refit
        if method == "hirshfeld":
            new_models = pro_models
        elif method == "isa":
            new_models = [isa_step2(shares[a], grids, a) for a in range(M)]
        elif method == "hirshfeld-i":
            new_models = [hirshfeld_i_step2(charges[a], opts.proatom_tables[a])
                          for a in range(M)]
        elif method == "lisa":
            new_models = []
            for a in range(M):
                radial = grids.radial[a]
                w = spherical_average(shares[a], grids.angular[a])
                start = None
                cur = pro_models[a].coefficients
                if charges[a] > 0 and np.all(cur > 0):
                    start = cur * (charges[a] / cur.sum())
                new_models.append(lisa_step2(radial.nodes, w, radial.weights,
                                             charges[a], pro_models[a].exponents,
                                             start=start))
        elif method == "gisa":
            new_models = []
            for a in range(M):
                model, msgs = gisa_step2(shares[a], grids, a, charges[a],
                                         pro_models[a].exponents,
                                         start=None)
                messages.extend(f"iteration {m_iter}: {msg}" for msg in msgs)
                new_models.append(model)
        elif method == "mbisa":
            new_models, msgs = mbisa_update(pro_models, grids)
            messages.extend(f"iteration {m_iter}: {msg}" for msg in msgs)

        pro_models = new_models

        S = math.inf
        if opts.record_entropy:
            S = sum(kl_entropy(shares[a], pro_models[a], grids, a) for a in range(M))
            if (method in ("isa", "lisa") and entropy_trace
                    and S > entropy_trace[-1] + ENTROPY_SLACK):
                raise EntropyIncreaseError(
                    f"{method} entropy rose from {entropy_trace[-1]:.12g} to {S:.12g} "
                    f"at iteration {m_iter}")
            entropy_trace.append(S)

        dN = float(np.max(np.abs(charges - state.charges))) \
            if np.all(np.isfinite(state.charges)) else math.inf
        dL2 = float(np.sqrt(np.max(norms_sq))) if np.all(np.isfinite(norms_sq)) else math.inf
        state = PartitionState(iteration=m_iter, pro_models=pro_models,
                               charges=charges, entropy=S,
                               step_norms=np.sqrt(norms_sq))
        prev_shares = shares
        if method == "hirshfeld" or (dN < opts.tol and dL2 < opts.tol_l2):
            converged = True
            break

    if lost_worst > LOST_CHARGE_WARN * N_total:
        msg = (f"convention-zero allocation lost {lost_worst:.3e} charge "
               f"(> {LOST_CHARGE_WARN:g} of N = {N_total:g})")
        messages.append(msg)
        warnings.warn(msg, stacklevel=2)

    dipoles = np.empty((M, 3))
    seconds = np.empty((M, 3, 3))
    profiles = []
    for a in range(M):
        mom = atomic_moments(prev_shares[a], grids, a)
        dipoles[a] = mom.p
        seconds[a] = mom.Q
        w = spherical_average(prev_shares[a], grids.angular[a])
        profiles.append((grids.radial[a].nodes.copy(), w))

    return PartitionResult(
        method=method,
        converged=converged,
        iterations=state.iteration,
        charges=state.charges,
        dipoles=dipoles,
        second_moments=seconds,
        profiles=profiles,
        pro_models=pro_models,
        entropy_trace=entropy_trace,
        charge_history=charge_history,
        l2_step_sq_history=l2_hist,
        density_sup=density_sup,
        lost_charge=lost_worst,
        elapsed_seconds=time.time() - t0,
        messages=messages,
    )
