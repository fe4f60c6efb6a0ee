"""
Spherical Hecke functions at a finite place: the assumption (A) function, its coset
decomposition, Satake eigenvalues and the vanishing of the gamma = 0 term.
"""
# Standard libraries
import os
import sys
import time
from fractions import Fraction
from typing import Dict, List, Sequence, Tuple

# Path resolution
project_root = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))
if project_root not in sys.path:
    sys.path.insert(0, project_root)

# Third-party libraries
import numpy as np

# Local imports
from models.geometric import GlobalTestFunction, HeckeFunction, SatakePair
from models.report import CheckResult
from services.error_handler import BudgetExceededError
from services.residue_enumeration import matrix_grid, shell_phase_table
from utils.logger import get_logger

logger = get_logger(__name__)

HECKE_MASS = "Phi = 1_{p^2} - (q^2+q+1) 1_{p GL2(O)}; the double coset is q^2+q+1 cosets, so int Phi = 0"
HECKE_EIGENVALUE = "pi(Phi) acts by q(alpha^2 + alpha beta + beta^2) - (q^2+q+1) alpha beta"
SIGMA0_VANISHING = "Sigma_0(X) = 0 under assumption (A)"


class HeckeService:
    """Service for the dyadic Hecke function and the vanishing lemma."""

    def __init__(self, budget: float = 1e8):
        self.budget = budget
        logger.info("HeckeService initialized")

    def _grid(self, modulus: int):
        if float(modulus) ** 4 > self.budget:
            raise BudgetExceededError(f"M2(Z/{modulus}) enumeration", float(modulus) ** 4, self.budget)
        return matrix_grid(modulus)

    # The assumption (A) function -------------------------------------
    def hecke_A_function(self, p: int, k: int = 2) -> HeckeFunction:
        phi = HeckeFunction(p, k)
        logger.debug(f"Hecke function at p={p}: {phi.coset_count} cosets")
        return phi

    def masses(self, phi: HeckeFunction) -> Dict[str, object]:
        """
        Masses of both parts of Phi for the Haar measure with vol GL2(Z_p) = 1.

        Counting mod p^3: the first part has count_pos points, p GL2(Z_p) has count_neg,
        and the measure of each coset g GL2(Z_p) with v(det g) = 2 is count_neg points.
        """
        p = phi.p
        a, b, c, d = self._grid(p ** phi.depth)
        det = (a * d - b * c) % p ** phi.depth
        count_pos = int(np.count_nonzero((det % (p * p) == 0) & (det != 0)))
        h = self._grid(p * p)
        unit_h = (h[0] * h[3] - h[1] * h[2]) % p != 0
        count_neg = int(np.count_nonzero(unit_h))
        mass_pos = Fraction(count_pos, count_neg)
        mass_neg = Fraction(phi.coset_count)
        return {"p": p, "count_pos": count_pos, "count_neg": count_neg,
                "mass_pos": mass_pos, "mass_neg": mass_neg, "total": mass_pos - mass_neg}

    def coset_representatives(self, p: int) -> List[Tuple[int, int, int, int]]:
        """(p^a, x; 0, p^c) with a + c = 2 and x mod p^a: representatives of g GL2(Z_p), v(det g) = 2."""
        reps = []
        for a in range(3):
            for x in range(p ** a):
                reps.append((p ** a, x, 0, p ** (2 - a)))
        return reps

    def coset_decomposition_check(self, phi: HeckeFunction) -> CheckResult:
        """Every g with v(det g) = 2 lies in exactly one r GL2(Z_p), each coset equally large."""
        start = time.perf_counter()
        p = phi.p
        mod = p ** phi.depth
        a, b, c, d = self._grid(mod)
        det = (a * d - b * c) % mod
        shell = (det % (p * p) == 0) & (det != 0)
        ga, gb, gc, gd = a[shell], b[shell], c[shell], d[shell]
        hits = np.zeros(len(ga), dtype=np.int64)
        sizes = []
        for r11, r12, _, r22 in self.coset_representatives(p):
            # adj(r) g = (r22 g11 - r12 g21, r22 g12 - r12 g22; r11 g21, r11 g22)
            inside = (((r22 * ga - r12 * gc) % (p * p) == 0) & ((r22 * gb - r12 * gd) % (p * p) == 0)
                      & ((r11 * gc) % (p * p) == 0) & ((r11 * gd) % (p * p) == 0))
            hits += inside
            sizes.append(int(np.count_nonzero(inside)))
        passed = bool(np.all(hits == 1)) and len(set(sizes)) == 1 and len(sizes) == phi.coset_count
        return CheckResult(
            name=f"hecke_cosets_p{p}",
            passed=passed,
            statement=HECKE_MASS,
            details={"representatives": len(sizes), "coset_sizes": sorted(set(sizes)),
                     "uncovered": int(np.count_nonzero(hits == 0)),
                     "overlaps": int(np.count_nonzero(hits > 1))},
            elapsed_s=time.perf_counter() - start,
        )

    def bi_invariance_check(self, phi: HeckeFunction) -> CheckResult:
        """Phi(k g) = Phi(g) = Phi(g k) for generators k of GL2(Z/p^3)."""
        start = time.perf_counter()
        p = phi.p
        mod = p ** phi.depth
        a, b, c, d = self._grid(mod)
        base = phi(a, b, c, d)
        generators = [(1, 1, 0, 1), (1, 0, 1, 1)]
        generators += [(u, 0, 0, 1) for u in range(1, mod) if u % p]
        failures = 0
        for k11, k12, k21, k22 in generators:
            left = phi((k11 * a + k12 * c) % mod, (k11 * b + k12 * d) % mod,
                       (k21 * a + k22 * c) % mod, (k21 * b + k22 * d) % mod)
            right = phi((a * k11 + b * k21) % mod, (a * k12 + b * k22) % mod,
                        (c * k11 + d * k21) % mod, (c * k12 + d * k22) % mod)
            failures += int(np.count_nonzero(left != base)) + int(np.count_nonzero(right != base))
        return CheckResult(
            name=f"hecke_bi_invariance_p{p}",
            passed=failures == 0,
            statement="Phi is bi-GL2(O)-invariant",
            details={"generators": len(generators), "failures": failures},
            elapsed_s=time.perf_counter() - start,
        )

    def assumption_A_check(self, phi: HeckeFunction) -> List[CheckResult]:
        """Support on v(det) = k, bi-invariance and vanishing total integral."""
        p = phi.p
        mod = p ** phi.depth
        a, b, c, d = self._grid(mod)
        det = (a * d - b * c) % mod
        values = phi(a, b, c, d)
        off_shell = (values != 0) & ~((det % (p * p) == 0) & (det != 0))
        masses = self.masses(phi)
        checks = [
            CheckResult(
                name=f"hecke_support_p{p}", passed=not off_shell.any(), statement=HECKE_MASS,
                details={"off_shell_points": int(np.count_nonzero(off_shell))}),
            self.bi_invariance_check(phi),
            CheckResult(
                name=f"hecke_mass_p{p}", passed=masses["total"] == 0
                and masses["mass_pos"] == phi.coset_count, statement=HECKE_MASS,
                details={key: str(value) for key, value in masses.items()}),
            self.coset_decomposition_check(phi),
        ]
        for check in checks:
            logger.info(f"{check.name}: {'pass' if check.passed else 'FAIL'}")
        return checks

    # Satake parameters -------------------------------------------------
    @staticmethod
    def hecke_eigenvalue(sp: SatakePair, q: float) -> complex:
        a, b = sp.alpha, sp.beta
        return q * (a * a + a * b + b * b) - (q * q + q + 1) * a * b

    @staticmethod
    def _eigenvalue_grid(q: float, x: np.ndarray, ab: np.ndarray) -> np.ndarray:
        """Eigenvalue as a function of x = alpha/beta and alpha beta."""
        return ab * (q * (x + 1 + 1 / x) - (q * q + q + 1))

    def eigenvalue_nonvanishing_scan(self, q: float, n_radius: int = 100, n_angle: int = 100,
                                     delta: float = 0.05) -> CheckResult:
        """
        min |eigenvalue| over alpha beta = exp(i phi), |alpha|, |beta| <= q^(1/2 - delta).

        The eigenvalue only depends on alpha beta through a unimodular factor, so the grid
        runs over x = alpha/beta with |x| in [q^-(1-2 delta), q^(1-2 delta)].
        """
        start = time.perf_counter()
        bound = 1.0 - 2.0 * delta
        radii = q ** np.linspace(-bound, bound, n_radius)
        angles = np.linspace(0.0, 2.0 * np.pi, n_angle, endpoint=False)
        r, theta = np.meshgrid(radii, angles, indexing="ij")
        x = r * np.exp(1j * theta)
        values = np.abs(self._eigenvalue_grid(q, x, np.ones_like(x)))
        i = int(np.argmin(values))
        sp = SatakePair.from_ratio(complex(x.ravel()[i]))
        return CheckResult(
            name=f"eigenvalue_nonvanishing_q{q:g}",
            passed=bool(values.min() > 0),
            statement=HECKE_EIGENVALUE,
            details={"grid_points": int(values.size), "delta": delta, "min_abs": float(values.min()),
                     "argmin_alpha": sp.alpha, "argmin_beta": sp.beta},
            elapsed_s=time.perf_counter() - start,
        )

    def boundary_ray_witness(self, q: float, steps: int = 8) -> Dict[str, List[float]]:
        """|eigenvalue| along alpha/beta = q^(1 - 2^-j) -> q, where it vanishes."""
        xs = [q ** (1.0 - 2.0 ** -j) for j in range(1, steps + 1)]
        values = [abs(self.hecke_eigenvalue(SatakePair.from_ratio(x), q)) for x in xs]
        return {"ratio": xs, "abs_eigenvalue": values}

    def tempered_sweep(self, q: float, n_angle: int = 1000) -> float:
        """min |eigenvalue| with |alpha| = |beta| = 1."""
        theta = np.linspace(0.0, 2.0 * np.pi, n_angle, endpoint=False)
        return float(np.abs(self._eigenvalue_grid(q, np.exp(1j * theta), np.ones(n_angle))).min())

    # Vanishing of the zeroth term --------------------------------------
    def sigma0_vanishing_check(self, gtf: GlobalTestFunction, b_exponents: Sequence[int] = (0, 1, 2, 3),
                               t_exponents: Sequence[int] = (0, 1, 2, 3, 4)) -> CheckResult:
        """
        The plain integral of f_12 f_22 and the 1_{Z_2^x}(P(b,T)/t)-weighted integrals over
        gl2(Q_2)^2, as exact integer sums; t = 2^e u with the unit u acting trivially.
        """
        start = time.perf_counter()
        p = gtf.p
        depth = gtf.depth
        a, b, c, d = self._grid(p ** depth)
        plain = int(gtf.dyadic_weight_T1(a, b, c, d).sum()) * int(
            gtf.dyadic_weight_T2(a % p, b % p, c % p, d % p).sum())
        rows = [{"integral": "plain", "value": plain}]
        zero = ((0, 0, 0, 0), (0, 0, 0, 0))
        weights = (gtf.dyadic_weight_T1, gtf.dyadic_weight_T2)
        for j in b_exponents:
            for sign in (1, -1):
                for e in t_exponents:
                    table, _, _ = shell_phase_table(
                        p, (1, sign * p ** j), zero, 0, e=e, weights=weights, min_depth=depth,
                        exact_valuation=True, budget=self.budget)
                    rows.append({"integral": "weighted", "b2": sign * p ** j, "t_valuation": e,
                                 "value": int(table.sum())})
        passed = all(row["value"] == 0 for row in rows)
        logger.info(f"sigma0 vanishing: {len(rows)} integrals, {'all zero' if passed else 'NONZERO'}")
        return CheckResult(
            name="sigma0_vanishing",
            passed=passed,
            statement=SIGMA0_VANISHING,
            details={"rows": rows},
            elapsed_s=time.perf_counter() - start,
        )
