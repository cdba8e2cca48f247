"""Evolutionary search engines over feature-subset genomes.

All engines maximize their objective vectors, share the same variation
pipeline (uniform crossover gate, per-individual bit-flip mutation gate,
empty-subset repair), and draw every random decision from streams keyed
(seed, generation, slot) so runs replay identically regardless of how
evaluations are scheduled.
"""

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigurationError
from .genotype import (
    Genome,
    bitflip_mutation,
    derive_rng,
    random_init,
    repair_empty,
    to_bitstring,
    uniform_crossover,
)
from .objectives import (
    EvaluationContext,
    Formulation,
    ObjectiveVector,
    evaluate,
)

ALGORITHMS = ("nsga2", "nsga3", "moead", "ga")


@dataclass
class Individual:
    genome: Genome
    objectives: ObjectiveVector


@dataclass
class SearchParams:
    """Knobs shared by all engines plus the algorithm-specific extras."""

    pop_size: int = 100
    generations: int = 500
    crossover_prob: float = 0.9
    mutation_prob: float = 1.0
    nsga3_divisions: int | None = None  # None: 99 for 2 objectives, 13 for 3
    moead_divisions: int | None = None  # None: smallest lattice covering pop_size
    moead_neighborhood: int = 20
    keep_external_archive: bool = False

    def validate(self) -> None:
        if self.pop_size < 2:
            raise ConfigurationError("pop_size must be >= 2")
        if self.generations < 0:
            raise ConfigurationError("generations must be >= 0")
        for name in ("crossover_prob", "mutation_prob"):
            p = getattr(self, name)
            if not 0.0 <= p <= 1.0:
                raise ConfigurationError(f"{name} must be within [0, 1]")
        if self.nsga3_divisions is not None and self.nsga3_divisions < 1:
            raise ConfigurationError("nsga3_divisions must be >= 1")
        if self.moead_divisions is not None and self.moead_divisions < 1:
            raise ConfigurationError("moead_divisions must be >= 1")
        if self.moead_neighborhood < 2:
            raise ConfigurationError("moead_neighborhood must be >= 2")


def check_compatibility(algorithm: str, formulation: Formulation) -> None:
    if algorithm not in ALGORITHMS:
        raise ConfigurationError(f"unknown algorithm {algorithm!r}")
    if algorithm == "ga" and formulation is not Formulation.ACC1:
        raise ConfigurationError("the plain GA optimizes the single-objective "
                                 "accuracy formulation only")
    if algorithm != "ga" and formulation.arity < 2:
        raise ConfigurationError(f"{algorithm} needs at least two objectives")


# ---------------------------------------------------------------------------
# Pareto machinery


def fast_nondominated_sort(objectives) -> list[list[int]]:
    """Partition objective vectors into fronts (front 0 = nondominated).

    Indices inside each front come back in ascending order.  Meant for
    population-scale input; the dominance matrix is quadratic in size.
    """
    values = np.asarray(objectives, dtype=np.float64)
    if values.ndim != 2:
        raise ValueError("objectives must form a 2-d array")
    n = values.shape[0]
    ge = (values[:, None, :] >= values[None, :, :]).all(axis=2)
    gt = (values[:, None, :] > values[None, :, :]).any(axis=2)
    dominates_matrix = ge & gt
    dominated_count = dominates_matrix.sum(axis=0)
    active = np.ones(n, dtype=bool)
    fronts: list[list[int]] = []
    while active.any():
        members = np.flatnonzero(active & (dominated_count == 0))
        fronts.append(members.tolist())
        dominated_count = dominated_count - dominates_matrix[members].sum(axis=0)
        active[members] = False
    return fronts


def nondominated_indices(objectives) -> list[int]:
    """Indices of nondominated vectors, memory-bounded for large sets."""
    values = np.asarray(objectives, dtype=np.float64)
    n = values.shape[0]
    keep = np.ones(n, dtype=bool)
    for start in range(0, n, 512):
        block = values[start:start + 512]
        ge = (values[:, None, :] >= block[None, :, :]).all(axis=2)
        gt = (values[:, None, :] > block[None, :, :]).any(axis=2)
        keep[start:start + 512] = ~(ge & gt).any(axis=0)
    return np.flatnonzero(keep).tolist()


def crowding_distance(objectives) -> np.ndarray:
    """Crowding of each vector within one front; boundary points get +inf and
    a zero-range objective contributes nothing."""
    values = np.asarray(objectives, dtype=np.float64)
    n = values.shape[0]
    dist = np.zeros(n)
    if n <= 2:
        dist[:] = np.inf
        return dist
    for m in range(values.shape[1]):
        col = values[:, m]
        order = np.argsort(col, kind="stable")
        dist[order[0]] = np.inf
        dist[order[-1]] = np.inf
        span = col[order[-1]] - col[order[0]]
        if span <= 0:
            continue
        gaps = (col[order[2:]] - col[order[:-2]]) / span
        interior = order[1:-1]
        dist[interior] = dist[interior] + gaps
    return dist


# ---------------------------------------------------------------------------
# Shared variation pipeline


def _evaluate_all(genomes: list[Genome], ctx: EvaluationContext,
                  workers: int) -> list[Individual]:
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            vectors = list(pool.map(lambda g: evaluate(g, ctx), genomes))
    else:
        vectors = [evaluate(g, ctx) for g in genomes]
    return [Individual(g, v) for g, v in zip(genomes, vectors)]


def _vary_pair(genome_a: Genome, genome_b: Genome, params: SearchParams,
               rng: np.random.Generator) -> tuple[Genome, Genome]:
    """Crossover gate, then per-child mutation gate and repair.  The draw
    order is fixed so replays are exact."""
    if rng.random() < params.crossover_prob:
        child_a, child_b = uniform_crossover(genome_a, genome_b, rng)
    else:
        child_a, child_b = genome_a.copy(), genome_b.copy()
    out = []
    for child in (child_a, child_b):
        if rng.random() < params.mutation_prob:
            child = bitflip_mutation(child, rng)
        out.append(repair_empty(child, rng))
    return out[0], out[1]


def _offspring_genomes(parents: list[Genome], count: int, params: SearchParams,
                       rng: np.random.Generator) -> list[Genome]:
    children: list[Genome] = []
    for k in range(0, len(parents) - 1, 2):
        children.extend(_vary_pair(parents[k], parents[k + 1], params, rng))
    return children[:count]


def _tournament(rng: np.random.Generator, n: int, key) -> int:
    """Binary tournament between two uniform picks; key(i) smaller wins."""
    i = int(rng.integers(n))
    j = int(rng.integers(n))
    return i if key(i) <= key(j) else j


# ---------------------------------------------------------------------------
# NSGA-II


def environmental_selection(individuals: list[Individual], keep: int) -> list[Individual]:
    """Elitist truncation: whole fronts first, split front by descending
    crowding with ties broken by lower population index."""
    if keep > len(individuals):
        raise ConfigurationError("cannot keep more individuals than given")
    objectives = [ind.objectives for ind in individuals]
    fronts = fast_nondominated_sort(objectives)
    chosen: list[int] = []
    for front in fronts:
        if len(chosen) + len(front) <= keep:
            chosen.extend(front)
            if len(chosen) == keep:
                break
            continue
        crowd = crowding_distance([objectives[i] for i in front])
        order = sorted(range(len(front)), key=lambda t: (-crowd[t], front[t]))
        chosen.extend(front[t] for t in order[: keep - len(chosen)])
        break
    return [individuals[i] for i in chosen]


def _ranked_tournament_parents(pop: list[Individual], count: int,
                               rng: np.random.Generator) -> list[Genome]:
    objectives = [ind.objectives for ind in pop]
    fronts = fast_nondominated_sort(objectives)
    rank = np.empty(len(pop), dtype=np.int64)
    crowd = np.empty(len(pop))
    for level, front in enumerate(fronts):
        rank[front] = level
        crowd[front] = crowding_distance([objectives[i] for i in front])
    picks = [
        _tournament(rng, len(pop), key=lambda i: (rank[i], -crowd[i], i))
        for _ in range(count)
    ]
    return [pop[i].genome for i in picks]


def nsga2_generation(pop: list[Individual], ctx: EvaluationContext,
                     params: SearchParams, rng: np.random.Generator,
                     workers: int = 1) -> list[Individual]:
    """One NSGA-II step: tournament parents, variation, elitist truncation of
    the combined parent+offspring population."""
    size = len(pop)
    pair_count = math.ceil(size / 2)
    parents = _ranked_tournament_parents(pop, 2 * pair_count, rng)
    children = _offspring_genomes(parents, size, params, rng)
    offspring = _evaluate_all(children, ctx, workers)
    return environmental_selection(pop + offspring, size)


# ---------------------------------------------------------------------------
# NSGA-III


def das_dennis_points(divisions: int, arity: int) -> np.ndarray:
    """Simplex lattice of weight/reference points with the given number of
    divisions per objective; row count is C(divisions+arity-1, arity-1)."""
    if arity < 2:
        raise ConfigurationError("reference points need at least two objectives")
    if divisions < 1:
        raise ConfigurationError("divisions must be >= 1")
    points: list[list[int]] = []

    def build(prefix: list[int], remaining: int, slots: int) -> None:
        if slots == 1:
            points.append(prefix + [remaining])
            return
        for k in range(remaining, -1, -1):
            build(prefix + [k], remaining - k, slots - 1)

    build([], divisions, arity)
    return np.array(points, dtype=np.float64) / divisions


def default_nsga3_divisions(arity: int) -> int:
    if arity == 2:
        return 99  # 100 points
    if arity == 3:
        return 13  # 105 points
    raise ConfigurationError(f"no default reference density for {arity} objectives")


def _achievement_extremes(translated: np.ndarray) -> np.ndarray:
    """Row index of the extreme point per axis by the achievement
    scalarizing function with weights eps=1e-6 except 1 on the axis."""
    m = translated.shape[1]
    extremes = np.empty(m, dtype=np.int64)
    for axis in range(m):
        weights = np.full(m, 1e-6)
        weights[axis] = 1.0
        asf = (translated / weights).max(axis=1)
        extremes[axis] = int(np.argmin(asf))
    return extremes


def _intercepts(translated: np.ndarray) -> np.ndarray:
    """Per-objective normalization spans from the extreme-point hyperplane,
    falling back to the observed maxima when the system is degenerate."""
    m = translated.shape[1]
    fallback = translated.max(axis=0)
    fallback = np.where(fallback > 1e-12, fallback, 1.0)
    extreme_rows = translated[_achievement_extremes(translated)]
    try:
        plane = np.linalg.solve(extreme_rows, np.ones(m))
    except np.linalg.LinAlgError:
        return fallback
    with np.errstate(divide="ignore", over="ignore"):
        intercepts = 1.0 / plane
    if not np.isfinite(intercepts).all() or (intercepts <= 1e-12).any():
        return fallback
    return intercepts


def _associate(normalized: np.ndarray, directions: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Closest reference direction per point by perpendicular distance."""
    unit = directions / np.linalg.norm(directions, axis=1, keepdims=True)
    along = normalized @ unit.T
    squared = (normalized ** 2).sum(axis=1, keepdims=True) - along ** 2
    dist = np.sqrt(np.clip(squared, 0.0, None))
    best = np.argmin(dist, axis=1)
    return best, dist[np.arange(len(best)), best]


def nsga3_select(individuals: list[Individual], keep: int, directions: np.ndarray,
                 rng: np.random.Generator, debug: dict | None = None) -> list[Individual]:
    """Reference-direction environmental selection.

    Whole fronts are taken while they fit; the split front fills reference
    niches lowest-count-first, random ties resolved from the run's stream.
    """
    if keep > len(individuals):
        raise ConfigurationError("cannot keep more individuals than given")
    objectives = np.array([ind.objectives for ind in individuals], dtype=np.float64)
    if objectives.shape[1] != directions.shape[1]:
        raise ConfigurationError("reference direction arity does not match objectives")
    fronts = fast_nondominated_sort(objectives)
    chosen: list[int] = []
    split_front: list[int] = []
    for front in fronts:
        if len(chosen) + len(front) <= keep:
            chosen.extend(front)
            if len(chosen) == keep:
                return [individuals[i] for i in chosen]
            continue
        split_front = front
        break

    considered = chosen + split_front
    # translate so larger-is-better becomes distance-from-ideal at the origin
    block = objectives[considered]
    translated = block.max(axis=0) - block
    normalized = translated / _intercepts(translated)
    assoc_dir, assoc_dist = _associate(normalized, directions)

    counts = np.zeros(directions.shape[0], dtype=np.int64)
    for pos in range(len(chosen)):
        counts[assoc_dir[pos]] += 1
    remaining = list(range(len(chosen), len(considered)))
    need = keep - len(chosen)
    fill_trace: list[tuple[int, int]] = []
    while need > 0:
        eligible: dict[int, list[int]] = {}
        for pos in remaining:
            eligible.setdefault(int(assoc_dir[pos]), []).append(pos)
        candidates = list(eligible)
        low = min(counts[d] for d in candidates)
        lowest = sorted(d for d in candidates if counts[d] == low)
        direction = lowest[int(rng.integers(len(lowest)))]
        members = eligible[direction]
        if counts[direction] == 0:
            dists = [assoc_dist[pos] for pos in members]
            pick = members[int(np.argmin(dists))]
        else:
            pick = members[int(rng.integers(len(members)))]
        fill_trace.append((direction, pick))
        remaining.remove(pick)
        counts[direction] += 1
        chosen.append(considered[pick])
        need -= 1

    if debug is not None:
        debug.update(
            considered=considered,
            first_selected=len(considered) - len(split_front),
            assoc_dir=assoc_dir.copy(),
            assoc_dist=assoc_dist.copy(),
            fill_trace=fill_trace,
        )
    return [individuals[i] for i in chosen]


def nsga3_generation(pop: list[Individual], ctx: EvaluationContext,
                     params: SearchParams, rng: np.random.Generator,
                     directions: np.ndarray, workers: int = 1) -> list[Individual]:
    """One NSGA-III step: variation as in NSGA-II, then niche selection."""
    size = len(pop)
    pair_count = math.ceil(size / 2)
    parents = _ranked_tournament_parents(pop, 2 * pair_count, rng)
    children = _offspring_genomes(parents, size, params, rng)
    offspring = _evaluate_all(children, ctx, workers)
    return nsga3_select(pop + offspring, size, directions, rng)


# ---------------------------------------------------------------------------
# MOEA/D


def tchebycheff(vector: ObjectiveVector, weight: np.ndarray, ideal: np.ndarray) -> float:
    """Weighted Chebyshev distance to the ideal point; zero weights are
    replaced by 1e-6 so no objective is ever ignored."""
    w = np.where(np.asarray(weight) == 0.0, 1e-6, weight)
    return float(np.max(w * np.abs(ideal - np.asarray(vector))))


def moead_weights(pop_size: int, arity: int) -> np.ndarray:
    """Exactly pop_size weight vectors: the smallest simplex lattice that
    covers pop_size, thinned by evenly spaced selection when it overshoots."""
    divisions = arity - 1
    while math.comb(divisions + arity - 1, arity - 1) < pop_size:
        divisions += 1
    lattice = das_dennis_points(divisions, arity)
    if len(lattice) == pop_size:
        return lattice
    keep = np.round(np.linspace(0, len(lattice) - 1, pop_size)).astype(np.int64)
    return lattice[keep]


def moead_neighborhoods(weights: np.ndarray, size: int) -> np.ndarray:
    """The `size` nearest weight vectors of each weight vector (itself
    included), stored in ascending index order."""
    diff = weights[:, None, :] - weights[None, :, :]
    dist = np.sqrt((diff ** 2).sum(axis=2))
    order = np.argsort(dist, axis=1, kind="stable")
    near = order[:, : min(size, weights.shape[0])]
    return np.sort(near, axis=1)


def moead_generation(pop: list[Individual], ctx: EvaluationContext,
                     params: SearchParams, rng: np.random.Generator,
                     weights: np.ndarray, neighborhoods: np.ndarray,
                     ideal: np.ndarray) -> tuple[list[Individual], np.ndarray]:
    """One MOEA/D sweep in subproblem index order.

    Each subproblem mates two distinct neighbors, keeps the first child of
    the pair, updates the ideal point, then replaces any neighbor whose
    Tchebycheff score the child strictly improves (no replacement cap).
    """
    pop = list(pop)
    ideal = ideal.copy()
    for i in range(len(pop)):
        nbrs = neighborhoods[i]
        pick = rng.choice(len(nbrs), size=2, replace=False)
        parent_a = pop[int(nbrs[pick[0]])].genome
        parent_b = pop[int(nbrs[pick[1]])].genome
        if rng.random() < params.crossover_prob:
            child = uniform_crossover(parent_a, parent_b, rng)[0]
        else:
            child = parent_a.copy()
        if rng.random() < params.mutation_prob:
            child = bitflip_mutation(child, rng)
        child = repair_empty(child, rng)
        vector = evaluate(child, ctx)
        ideal = np.maximum(ideal, vector)
        for j in nbrs:
            j = int(j)
            if tchebycheff(vector, weights[j], ideal) < tchebycheff(
                pop[j].objectives, weights[j], ideal
            ):
                pop[j] = Individual(child, vector)
    return pop, ideal


# ---------------------------------------------------------------------------
# Single-objective GA


def ga_generation(pop: list[Individual], ctx: EvaluationContext,
                  params: SearchParams, rng: np.random.Generator,
                  workers: int = 1) -> list[Individual]:
    """One generational GA step with a single elite.

    Tournaments compare accuracy, ties won by the lower population index; the
    elite individual is placed first in the next population.
    """
    size = len(pop)
    fitness = np.array([ind.objectives[0] for ind in pop])
    elite = int(np.argmax(fitness))  # first maximum: lower index wins ties
    pair_count = math.ceil((size - 1) / 2)
    picks = [
        _tournament(rng, size, key=lambda i: (-fitness[i], i))
        for _ in range(2 * pair_count)
    ]
    parents = [pop[i].genome for i in picks]
    children = _offspring_genomes(parents, size - 1, params, rng)
    offspring = _evaluate_all(children, ctx, workers)
    return [pop[elite]] + offspring


# ---------------------------------------------------------------------------
# Run orchestration


@dataclass
class ArchiveMember:
    genome: Genome
    objectives: ObjectiveVector


@dataclass
class ParetoArchive:
    formulation: Formulation
    members: list[ArchiveMember] = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.members)


def extract_archive(pop: list[Individual], formulation: Formulation) -> ParetoArchive:
    """Deduplicated nondominated members of a population, sorted by subset
    size then bitstring for stable output."""
    unique: dict[bytes, Individual] = {}
    for ind in pop:
        unique.setdefault(ind.genome.tobytes(), ind)
    pool = list(unique.values())
    keep = nondominated_indices([ind.objectives for ind in pool])
    members = [ArchiveMember(pool[i].genome.copy(), pool[i].objectives) for i in keep]
    members.sort(key=lambda m: (int(m.genome.sum()), to_bitstring(m.genome)))
    return ParetoArchive(formulation=formulation, members=members)


def _progress_record(generation: int, pop: list[Individual],
                     formulation: Formulation) -> dict:
    names = formulation.objective_names
    vectors = np.array([ind.objectives for ind in pop])
    best = {
        name: float(vectors[:, idx].max())
        for idx, name in enumerate(names)
        if name != "neg_size"
    }
    if formulation is Formulation.ACC1:
        archive_size = 1
    else:
        archive_size = len(fast_nondominated_sort([ind.objectives for ind in pop])[0])
    return {
        "generation": generation,
        "best_accuracy": best.get("accuracy"),
        "best_dr": best.get("detection_rate"),
        "best_f1": best.get("f1"),
        "min_size": int(min(ind.genome.sum() for ind in pop)),
        "archive_size": archive_size,
    }


def run(algorithm: str, ctx: EvaluationContext, params: SearchParams,
        seed, progress=None, workers: int = 1) -> ParetoArchive:
    """Initialize, iterate, and extract the final nondominated archive.

    `seed` is an int or a tuple prefix; every stochastic decision derives
    from (seed, generation, slot) streams.  `progress`, when given, receives
    one record dict per generation including generation zero.
    """
    params.validate()
    check_compatibility(algorithm, ctx.formulation)
    key = (seed,) if isinstance(seed, int) else tuple(seed)
    arity = ctx.formulation.arity

    directions = weights = neighborhoods = ideal = None
    pop_size = params.pop_size
    if algorithm == "nsga3":
        divisions = params.nsga3_divisions or default_nsga3_divisions(arity)
        directions = das_dennis_points(divisions, arity)
    elif algorithm == "moead":
        if params.moead_divisions is not None:
            weights = das_dennis_points(params.moead_divisions, arity)
        else:
            weights = moead_weights(params.pop_size, arity)
        pop_size = len(weights)  # the population is one member per subproblem
        neighborhoods = moead_neighborhoods(weights, params.moead_neighborhood)

    genomes = []
    for slot in range(pop_size):
        rng = derive_rng(*key, 0, slot)
        genomes.append(repair_empty(random_init(ctx.feature_count, rng), rng))
    pop = _evaluate_all(genomes, ctx, workers)
    if algorithm == "moead":
        ideal = np.array([ind.objectives for ind in pop]).max(axis=0)

    external: dict[bytes, Individual] = {}

    def absorb(current: list[Individual]) -> None:
        if not params.keep_external_archive:
            return
        for ind in current:
            external.setdefault(ind.genome.tobytes(), ind)

    absorb(pop)
    if progress is not None:
        progress(_progress_record(0, pop, ctx.formulation))

    for generation in range(1, params.generations + 1):
        rng = derive_rng(*key, generation, 0)
        if algorithm == "nsga2":
            pop = nsga2_generation(pop, ctx, params, rng, workers)
        elif algorithm == "nsga3":
            pop = nsga3_generation(pop, ctx, params, rng, directions, workers)
        elif algorithm == "moead":
            pop, ideal = moead_generation(pop, ctx, params, rng, weights,
                                          neighborhoods, ideal)
        else:
            pop = ga_generation(pop, ctx, params, rng, workers)
        absorb(pop)
        if progress is not None:
            progress(_progress_record(generation, pop, ctx.formulation))

    if algorithm == "ga":
        fitness = [ind.objectives[0] for ind in pop]
        best = pop[int(np.argmax(fitness))]
        return ParetoArchive(formulation=ctx.formulation,
                             members=[ArchiveMember(best.genome.copy(), best.objectives)])
    pool = list(external.values()) if params.keep_external_archive else pop
    return extract_archive(pool, ctx.formulation)


# ---------------------------------------------------------------------------
# Hypervolume (used by tests and reports, not by the search)


def _hypervolume_2d(points: np.ndarray, reference: np.ndarray) -> float:
    order = np.lexsort((-points[:, 1], -points[:, 0]))
    covered_y = reference[1]
    volume = 0.0
    for x, y in points[order]:
        if y > covered_y:
            volume += (x - reference[0]) * (y - covered_y)
            covered_y = y
    return volume


def hypervolume(points, reference) -> float:
    """Dominated hypervolume (maximization) for two or three objectives.

    Every point must be componentwise >= the reference point.  Two objectives
    use a plane sweep; three slice along the last objective.
    """
    reference = np.asarray(reference, dtype=np.float64)
    if reference.ndim != 1 or len(reference) not in (2, 3):
        raise ValueError("reference must have two or three components")
    pts = np.asarray(list(points), dtype=np.float64)
    if pts.size == 0:
        return 0.0
    if pts.ndim != 2 or pts.shape[1] != len(reference):
        raise ValueError("points must match the reference arity")
    if (pts < reference).any():
        raise ValueError("every point must dominate the reference point")
    if len(reference) == 2:
        return _hypervolume_2d(pts, reference)
    volume = 0.0
    levels = np.unique(pts[:, 2])[::-1]
    for idx, z in enumerate(levels):
        depth = z - (levels[idx + 1] if idx + 1 < len(levels) else reference[2])
        slab = pts[pts[:, 2] >= z][:, :2]
        volume += _hypervolume_2d(slab, reference[:2]) * depth
    return volume
