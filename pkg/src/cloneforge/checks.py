"""Batch verification checks shared by the CLI and the acceptance tests.

Each check returns a :class:`CheckResult`; ``details`` only holds values that
are a deterministic function of the configuration, timings are kept apart.
"""
from __future__ import annotations

import itertools
import math
import time
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from . import filters as fl
from . import semilattice as sl
from . import shift as sh
from .engine import generate_clone
from .finops import OpTable, all_tables, evaluate_tree, fix_set, is_idempotent


@dataclass
class RunConfig:
    scenario: str = "all"
    seed: int = 0
    y_count: int = 2
    window: tuple[int, int] = (-24, 24)
    max_step: int = 8
    samples: int = 200
    theorem_instances: int = 100
    max_tuples: int = 4
    semilattice_max: int = 6
    galois_max: int = 5
    random_semilattices: int = 50
    interpolation_instances: int = 500
    chain_length: int = 8
    filter_base: int = 3
    crosscheck_base: int = 2
    arity_bound: int = 3
    size_bound: int = 2_000_000
    binary_samples: int = 500
    filter_lattice_max: int = 5
    out: str = "report"

    def validate(self):
        if self.scenario not in SCENARIOS:
            raise ValueError(f"unknown scenario {self.scenario!r}")
        lo, hi = self.window
        if lo >= hi:
            raise ValueError("window must have lo < hi")
        if self.y_count < 1 or self.max_step < 1 or self.samples < 1:
            raise ValueError("counts must be positive")
        if self.semilattice_max > sl.BRUTE_FORCE_BOUND:
            raise ValueError(f"semilattice_max above {sl.BRUTE_FORCE_BOUND}")
        if self.filter_lattice_max > fl.FILTER_LATTICE_BOUND:
            raise ValueError(f"filter_lattice_max above {fl.FILTER_LATTICE_BOUND}")
        if self.crosscheck_base > 3 or self.arity_bound > 3:
            raise ValueError("extensional cross-check limited to base 3, arity 3")


@dataclass
class CheckResult:
    id: str
    title: str
    passed: bool
    cases: int
    failures: list = field(default_factory=list)
    details: dict = field(default_factory=dict)
    certificates: int = 0
    certificate_failures: int = 0
    seconds: float = 0.0
    max_seconds: float | None = None

    def line(self) -> str:
        mark = "PASS" if self.passed else "FAIL"
        extra = f", {self.seconds:.1f}s" if self.max_seconds else ""
        return f"[{mark}] {self.id} {self.title}: {self.cases} cases, {len(self.failures)} failures{extra}"

    def to_json(self) -> dict:
        return {
            "id": self.id, "title": self.title, "passed": self.passed, "cases": self.cases,
            "failures": self.failures[:20], "failure_count": len(self.failures),
            "details": self.details, "certificates": self.certificates,
            "certificate_failures": self.certificate_failures,
        }


def _timed(cid: str, title: str, max_seconds: float | None = None):
    def wrap(fn: Callable[..., CheckResult]):
        def run(cfg: RunConfig) -> CheckResult:
            t0 = time.perf_counter()
            res = fn(cfg)
            res.id, res.title, res.max_seconds = cid, title, max_seconds
            res.seconds = time.perf_counter() - t0
            res.passed = not res.failures and res.certificate_failures == 0
            if max_seconds is not None and res.seconds >= max_seconds:
                res.passed = False
            return res
        run.check_id = cid
        return run
    return wrap


# -- shift-equivariant clones ------------------------------------------------

def _random_support(rng, arity, window, y_count, size):
    lo, hi = window
    return [tuple((int(rng.integers(y_count)), int(rng.integers(lo, hi + 1))) for _ in range(arity))
            for _ in range(size)]


@_timed("C1", "divisibility correspondence", 30)
def divisibility(cfg: RunConfig) -> CheckResult:
    rng = np.random.default_rng(cfg.seed)
    res = CheckResult("", "", True, 0)
    for n, m in itertools.product(range(1, cfg.max_step + 1), repeat=2):
        if m % n == 0:
            for s in range(cfg.samples):
                arity = 1 + s % 2
                support = None if arity == 1 else _random_support(rng, 2, cfg.window, cfg.y_count, 8)
                f = sh.random_pol_sn(n, arity, cfg.window, cfg.y_count, rng, support=support)
                res.cases += 1
                if not (sh.pol_sn_member(f, n) and sh.pol_sn_member(f, m)):
                    res.failures.append({"n": n, "m": m, "sample": s})
        else:
            f = sh.divisibility_counterexample(n, m, cfg.window, cfg.y_count)
            res.cases += 1
            if f is None or not sh.pol_sn_member(f, n) or sh.pol_sn_member(f, m):
                res.failures.append({"n": n, "m": m, "counterexample": "missing"})
    return res


@_timed("C2", "subgroup / gcd law")
def gcd_law(cfg: RunConfig) -> CheckResult:
    rng = np.random.default_rng(cfg.seed + 1)
    res = CheckResult("", "", True, 0)
    vacuous = 0
    narrow = (-18, 18)
    for n, m in itertools.product(range(2, cfg.max_step + 1), repeat=2):
        g = math.gcd(n, m)
        for s in range(cfg.samples):
            if s % 8 == 7:
                f = sh.random_double_equivariant(n, m, 2, narrow, 1, rng)
                win = narrow
            else:
                f = sh.random_double_equivariant(n, m, 1, cfg.window, cfg.y_count, rng)
                win = cfg.window
            res.cases += 1
            if not (sh.pol_sn_member(f, n) and sh.pol_sn_member(f, m)):
                res.failures.append({"n": n, "m": m, "sample": s, "reason": "generator"})
                continue
            inner = sh.restrict(f, sh.inner_window(win, n + m))
            if not inner.entries:
                vacuous += 1
            if not sh.pol_sn_member(inner, g):
                res.failures.append({"n": n, "m": m, "sample": s})
    res.details["vacuous"] = vacuous
    return res


def _theorem_instance(rng, cfg: RunConfig):
    nstar = int(rng.choice([2, 3]))
    arity = int(rng.integers(1, 4))
    count = int(rng.integers(1, cfg.max_tuples + 1))
    W = cfg.window
    zone = (-6, 6)
    tuples: list = []
    while len(tuples) < count:
        if tuples and rng.random() < 0.6:
            base = tuples[int(rng.integers(len(tuples)))]
            ell = int(rng.choice([x for x in range(-5, 6) if x % nstar]))
            cand = sh.shift_tuple(base, ell)
        else:
            cand = _random_support(rng, arity, zone, cfg.y_count, 1)[0]
        if not sh.in_window(cand, zone):
            continue
        if all(sh.parallel_offset(cand, t, nstar) is None for t in tuples):
            tuples.append(cand)
    witnesses = [sh.bump_op(nstar, W, cfg.y_count)]
    for _ in range(int(rng.integers(0, 2))):
        witnesses.append(sh.random_pol_sn(nstar, 1, W, cfg.y_count, rng, spread=1))
    g = sh.random_pol_sn(nstar, arity, W, cfg.y_count, rng, support=tuples)
    return nstar, tuples, witnesses, g


@_timed("C3", "interpolation by the theorem's construction", 60)
def theorem_construction(cfg: RunConfig) -> CheckResult:
    rng = np.random.default_rng(cfg.seed + 2)
    res = CheckResult("", "", True, 0)
    separators = 0
    for i in range(cfg.theorem_instances):
        nstar, tuples, witnesses, g = _theorem_instance(rng, cfg)
        res.cases += 1
        try:
            f, cert = sh.theorem_interpolation(g, tuples, witnesses)
        except sh.PreconditionError as e:
            res.failures.append({"instance": i, "error": str(e)})
            continue
        if any(f.get(a) != g.get(a) for a in tuples):
            res.failures.append({"instance": i, "reason": "values"})
        for (l1, l2), sep in zip(cert.pairs, cert.separators):
            a, b = tuples[l1], tuples[l2]
            if sh.parallel_offset(a, b) is None:
                continue
            separators += 1
            fa, fb = sep.op.get(a), sep.op.get(b)
            if fa is None or fb is None or sh.parallel_offset(a + (fa,), b + (fb,)) is not None:
                res.failures.append({"instance": i, "pair": [l1, l2], "reason": "separator"})
        res.certificates += 1
        if any(cert.evaluate(a) != g.get(a) for a in tuples):
            res.certificate_failures += 1
    res.details["separators"] = separators
    return res


# -- semilattice clones --------------------------------------------------------

def _corpus(cfg: RunConfig, max_size: int):
    return [S for S in sl.corpus(cfg.seed, cfg.semilattice_max, cfg.random_semilattices)
            if S.size <= max_size]


@_timed("C4", "congruence / order bijection")
def bijection(cfg: RunConfig) -> CheckResult:
    res = CheckResult("", "", True, 0)
    for si, S in enumerate(_corpus(cfg, cfg.semilattice_max)):
        for p in sl.enumerate_congruences(S):
            res.cases += 1
            R = sl.congruence_to_order(S, p)
            if not sl.is_congruence_order(S, R):
                res.failures.append({"semilattice": si, "partition": p, "reason": "not an order"})
            if sl.order_to_congruence(R) != p:
                res.failures.append({"semilattice": si, "partition": p})
            if not (sl.congruence_to_order(S, sl.order_to_congruence(R)) == R).all():
                res.failures.append({"semilattice": si, "partition": p, "reason": "order side"})
    return res


@_timed("C5", "Galois round-trips", 120)
def galois(cfg: RunConfig) -> CheckResult:
    rng = np.random.default_rng(cfg.seed + 3)
    res = CheckResult("", "", True, 0)
    small = _corpus(cfg, cfg.galois_max)
    orders = 0
    for si, S in enumerate(small):
        for R in sl.congruence_orders(S):
            orders += 1
            res.cases += 1
            got = sl.order_of_unary_generators(S, sl.unary_members(S, R))
            if not (got == R).all():
                res.failures.append({"semilattice": si, "order": R.astype(int).tolist()})
    for i in range(cfg.interpolation_instances):
        S = small[int(rng.integers(len(small)))]
        Rs = sl.congruence_orders(S)
        R = Rs[int(rng.integers(len(Rs)))]
        arity = int(rng.integers(1, 4))
        f = sl.e_clone(S, R).sample(arity, rng)
        total = S.size ** arity
        count = int(rng.integers(1, min(total, 6) + 1))
        idx = rng.choice(total, size=count, replace=False)
        pts = [tuple(int(v) for v in np.unravel_index(j, (S.size,) * arity)) for j in idx]
        res.cases += 1
        try:
            ei = sl.e_interpolate(S, R, f, pts)
        except sl.SemilatticeError as e:
            res.failures.append({"instance": i, "error": str(e)})
            continue
        if any(ei.op(*p) != f(*p) for p in pts):
            res.failures.append({"instance": i, "reason": "values"})
        if not all(sl.e_member(h, S, R) for h in ei.generators):
            res.failures.append({"instance": i, "reason": "building block outside E(R)"})
        res.certificates += 1
        if not ei.verify():
            res.certificate_failures += 1
    res.details["orders"] = orders
    return res


@_timed("C6", "(N, max) example round-trips")
def chain_example(cfg: RunConfig) -> CheckResult:
    res = CheckResult("", "", True, 0)
    N = cfg.chain_length
    parts = sl.enumerate_congruences(sl.Semilattice.chain(N))
    if len(parts) != 2 ** (N - 1) or not all(sl.is_interval_partition(p) for p in parts):
        res.failures.append({"reason": "congruences of the chain are not the interval partitions"})
    for p in parts:
        res.cases += 1
        if sl.set_to_congruence(N, sl.interval_congruence_maps(N, p)) != p:
            res.failures.append({"partition": p})
    for r in range(N):
        for A in itertools.combinations(range(N - 1), r):
            res.cases += 1
            if sl.interval_congruence_maps(N, sl.set_to_congruence(N, A)) != frozenset(A):
                res.failures.append({"set": list(A)})
    return res


# -- filter clones -------------------------------------------------------------

def fix_witness(q: int, A) -> OpTable:
    """A unary op with fixed-point set exactly ``A``."""
    A = frozenset(A)
    return OpTable.from_values(q, 1, [x if x in A else (x + 1) % q for x in range(q)])


@_timed("C7", "filter correspondence, exhaustive")
def filter_crosscheck(cfg: RunConfig) -> CheckResult:
    q = cfg.crosscheck_base
    res = CheckResult("", "", True, 0)
    idem = [f for k in range(1, cfg.arity_bound + 1) for f in all_tables(q, k) if is_idempotent(f)]
    for r in range(q + 1):
        for A in map(frozenset, itertools.combinations(range(q), r)):
            g = fix_witness(q, A)
            clo = generate_clone(idem + [g], cfg.arity_bound, cfg.size_bound)
            res.cases += 1
            for k in (1, 2):
                if not clo.saturated.get(k):
                    res.failures.append({"A": sorted(A), "arity": k, "reason": "unsaturated"})
                    continue
                got = {f.table for f in clo.ops(k)}
                want = {f.table for f in all_tables(q, k) if A <= fix_set(f)}
                if got != want:
                    res.failures.append({"A": sorted(A), "arity": k,
                                         "missing": len(want - got), "extra": len(got - want)})
            for k in (1, 2):
                for f in clo.ops(k):
                    res.certificates += 1
                    if evaluate_tree(clo.provenance(f), clo.generators, q) != f:
                        res.certificate_failures += 1
    res.details["generators"] = len(idem) + 1
    return res


@_timed("C8", "certificate completeness", 30)
def certificates(cfg: RunConfig) -> CheckResult:
    q = cfg.filter_base
    rng = np.random.default_rng(cfg.seed + 4)
    res = CheckResult("", "", True, 0)
    subsets = [frozenset(c) for r in range(q + 1) for c in itertools.combinations(range(q), r)]
    refusals = 0

    def one(f, A):
        nonlocal refusals
        g = fix_witness(q, A)
        out = fl.membership_by_certificate(f, A, g)
        res.cases += 1
        if A <= fix_set(f):
            if not isinstance(out, fl.Certificate):
                res.failures.append({"f": list(f.table), "A": sorted(A), "reason": "refused"})
                return
            res.certificates += 1
            if not out.verify():
                res.certificate_failures += 1
        else:
            refusals += 1
            if not isinstance(out, fl.Refusal) or out.witness not in A or f(*(out.witness,) * f.arity) == out.witness:
                res.failures.append({"f": list(f.table), "A": sorted(A), "reason": "bad refusal"})

    for A in subsets:
        for f in all_tables(q, 1):
            one(f, A)
    for i in range(cfg.binary_samples):
        A = subsets[int(rng.integers(len(subsets)))]
        if i % 2:
            f = fl.cf_clone(fl.PrincipalFilter(q, A)).sample(2, rng)
        else:
            f = OpTable(q, 2, rng.integers(0, q, size=q * q, dtype=np.uint8).tobytes())
        one(f, A)
    res.details["refusals"] = refusals
    return res


@_timed("C9", "filter-lattice cover relation")
def cover_relation(cfg: RunConfig) -> CheckResult:
    res = CheckResult("", "", True, 0)
    for q in range(1, cfg.filter_lattice_max + 1):
        lat = fl.filter_lattice(q)
        res.cases += 1
        if lat.covers != lat.one_point_extensions():
            res.failures.append({"q": q})
        if sorted(F.generator for F in lat.coatoms()) != sorted(F.generator for F in lat.ultrafilters):
            res.failures.append({"q": q, "reason": "coatoms are not the ultrafilters"})
        res.details[f"covers_q{q}"] = len(lat.covers)
    return res


def soundness(results: list[CheckResult]) -> CheckResult:
    t0 = time.perf_counter()
    used = [r for r in results if r.id in {"C3", "C5", "C7", "C8"}]
    res = CheckResult("C10", "engine soundness", True, sum(r.certificates for r in used))
    for r in used:
        res.details[r.id] = {"certificates": r.certificates, "failures": r.certificate_failures}
        if r.certificate_failures:
            res.failures.append({"check": r.id, "failures": r.certificate_failures})
        if not r.certificates:
            res.failures.append({"check": r.id, "reason": "no certificates emitted"})
    res.passed = not res.failures
    res.seconds = time.perf_counter() - t0
    return res


SCENARIOS = {
    "shift": [divisibility, gcd_law, theorem_construction],
    "semilattice": [bijection, galois, chain_example],
    "filters": [filter_crosscheck, certificates, cover_relation],
}
SCENARIOS["all"] = SCENARIOS["shift"] + SCENARIOS["semilattice"] + SCENARIOS["filters"]


def run_checks(cfg: RunConfig) -> list[CheckResult]:
    cfg.validate()
    results = [check(cfg) for check in SCENARIOS[cfg.scenario]]
    if cfg.scenario == "all":
        results.append(soundness(results))
    return results
