"""Innovation tasks as recipe books.

A task is a set of base elements plus a recipe book mapping unordered element
pairs to new elements, a reward per crafted element, and an episode horizon.
Three generators cover the task families studied here: a single linear path, a
pair of paths that merge into a better hidden branch, and n parallel paths of
which exactly one is worth completing.
"""
from __future__ import annotations

import os
from dataclasses import dataclass, field, replace
from typing import Iterable


class BudgetExceededError(RuntimeError):
    """Raised when exact search visits more states than allowed."""


@dataclass(frozen=True)
class Element:
    id: int
    name: str
    path: str  # single capital letter for crafted paths, "base" otherwise
    rank: int  # 0 for base elements, position within the path otherwise
    level: int


@dataclass
class RecipeBook:
    """Unordered-pair recipes with per-element rewards.

    entries keys are (low_id, high_id) tuples so that lookup is symmetric by
    construction; every crafted element is the output of exactly one entry.
    """

    elements: list[Element]
    entries: dict[tuple[int, int], int]
    initial_set: list[int]
    rewards: dict[int, float]

    def lookup(self, a: int, b: int) -> int | None:
        return self.entries.get((a, b) if a <= b else (b, a))

    def element(self, element_id: int) -> Element:
        if not 0 <= element_id < len(self.elements):
            raise KeyError(f"unknown element id {element_id}")
        return self.elements[element_id]

    def validate(self) -> None:
        ids = [e.id for e in self.elements]
        if ids != list(range(len(ids))):
            raise ValueError("element ids must be contiguous from 0")
        crafted = sorted(e.id for e in self.elements if e.path != "base")
        if sorted(self.entries.values()) != crafted:
            raise ValueError("each crafted element needs exactly one recipe")
        for e in self.elements:
            expected = 0 if e.path == "base" else innovation_level(e.id, self)
            if e.level != expected:
                raise ValueError(f"stored level of {e.name} disagrees with the recipe graph")
        for lo, hi in self.entries:
            if not (0 <= lo <= hi < len(self.elements)):
                raise ValueError("recipe references an unknown element")
        check_rewards_monotone(self)


def check_rewards_monotone(book: RecipeBook) -> None:
    """Assert rewards strictly increase with innovation level along each path."""
    paths: dict[str, list[Element]] = {}
    for e in book.elements:
        if e.path != "base":
            paths.setdefault(e.path, []).append(e)
    for chain in paths.values():
        chain.sort(key=lambda e: e.rank)
        for prev, cur in zip(chain, chain[1:]):
            if cur.level <= prev.level:
                raise ValueError(f"levels not increasing along path {cur.path}")
            if book.rewards[cur.id] <= book.rewards[prev.id]:
                raise ValueError(f"rewards not increasing along path {cur.path}")
        if any(book.rewards[e.id] <= 0 for e in chain):
            raise ValueError("crafted rewards must be positive")


@dataclass
class TaskSpec:
    name: str
    recipe_book: RecipeBook
    horizon: int  # in selection actions; one craft attempt = 2 actions
    optimal_return: float = 0.0

    def __post_init__(self):
        if self.horizon % 2 != 0:
            raise ValueError("horizon must be even (two selections per craft attempt)")

    @property
    def n_elements(self) -> int:
        return len(self.recipe_book.elements)


def innovation_level(element_id: int, book: RecipeBook) -> int:
    """Depth of an element in the crafting hierarchy.

    Base elements sit at level 0. A crafted element is one level above the
    combined levels of the crafted ingredients of its recipe, which makes the
    level of the i-th element of a plain path equal to i and charges a merged
    path for the full prefixes it consumed.
    """
    book.element(element_id)  # raises KeyError on unknown ids
    by_output = {out: pair for pair, out in book.entries.items()}

    cache: dict[int, int] = {}

    def level(eid: int) -> int:
        if book.elements[eid].path == "base":
            return 0
        if eid not in cache:
            a, b = by_output[eid]
            cache[eid] = 1 + level(a) + level(b)
        return cache[eid]

    return level(element_id)


def solve_optimal(task: TaskSpec, max_states: int = 2_000_000) -> tuple[float, tuple[int, ...]]:
    """Exact maximum-return crafting sequence within the horizon.

    Depth-first search with memoization on (inventory, attempts left). Ties in
    return are broken toward the lexicographically smallest id sequence so the
    result is unique and stable. Raises BudgetExceededError past max_states.
    """
    book = task.recipe_book
    recipes = sorted(((pair, out) for pair, out in book.entries.items()), key=lambda kv: kv[1])
    memo: dict[tuple[frozenset[int], int], tuple[float, tuple[int, ...]]] = {}
    visited = 0

    def best(inventory: frozenset[int], left: int) -> tuple[float, tuple[int, ...]]:
        nonlocal visited
        if left == 0:
            return 0.0, ()
        key = (inventory, left)
        hit = memo.get(key)
        if hit is not None:
            return hit
        visited += 1
        if visited > max_states:
            raise BudgetExceededError(f"exceeded {max_states} search states")
        result = (0.0, ())
        for (a, b), out in recipes:
            if a in inventory and b in inventory and out not in inventory:
                ret, traj = best(inventory | {out}, left - 1)
                cand = (book.rewards[out] + ret, (out,) + traj)
                if cand[0] > result[0] or (cand[0] == result[0] and cand[1] < result[1]):
                    result = cand
        memo[key] = result
        return result

    return best(frozenset(book.initial_set), task.horizon // 2)


# ----------------------------------------------------------------- generators

def _base_elements(labels: Iterable[str]) -> list[Element]:
    return [Element(i, name, "base", 0, 0) for i, name in enumerate(labels)]


def _chain_recipes(entries, first_pair, path_ids, bases):
    """Wire a path: rank 1 from first_pair, each later rank from its
    predecessor plus a base chosen round-robin."""
    lo, hi = sorted(first_pair)
    entries[(lo, hi)] = path_ids[0]
    for i, eid in enumerate(path_ids[1:], start=2):
        prev = path_ids[i - 2]
        base = bases[(i - 2) % len(bases)]
        entries[tuple(sorted((prev, base)))] = eid


def _finish(name, elements, entries, initial, rewards, horizon):
    book = RecipeBook(elements, entries, initial, rewards)
    book.validate()
    task = TaskSpec(name, book, horizon)
    task.optimal_return, _ = solve_optimal(task)
    if horizon > 0 and task.optimal_return <= 0:
        raise ValueError("generated task has no positive-return trajectory")
    return task


def build_single_path(length: int, horizon: int | None = None) -> TaskSpec:
    """One path A1..A_length over a three-element initial set.

    The default horizon leaves four spare craft attempts beyond the path
    itself, which is harmless to the optimum (there is nothing else to craft)
    and gives learners room to explore.
    """
    if length < 1:
        raise ValueError("length must be >= 1")
    elements = _base_elements(["a1", "a2", "a3"])
    base_ids = [0, 1, 2]
    path_ids = list(range(3, 3 + length))
    elements += [Element(eid, f"A{i}", "A", i, i) for i, eid in enumerate(path_ids, start=1)]
    entries: dict[tuple[int, int], int] = {}
    _chain_recipes(entries, (0, 1), path_ids, base_ids)
    rewards = {eid: float(elements[eid].level) for eid in path_ids}
    if horizon is None:
        horizon = 2 * (length + 4)
    return _finish(f"single_path-{length}", elements, entries, base_ids, rewards, horizon)


def build_merging_paths(
    branch_len: int = 8,
    crossroad_rank: int = 2,
    merged_len: int = 4,
    horizon: int | None = None,
) -> TaskSpec:
    """Two branches A and B whose rank-crossroad elements combine into path C.

    C elements out-reward the branch terminals, so the crossroad route is the
    global optimum while a completed branch is only a local one. The default
    horizon fits the optimal route exactly (2 crafts per attempt on
    2*crossroad_rank + merged_len attempts); a looser horizon would let the
    optimum pad itself with extra branch elements.
    """
    if branch_len < 1 or merged_len < 1 or crossroad_rank < 1:
        raise ValueError("lengths must be >= 1")
    if crossroad_rank >= branch_len:
        raise ValueError("crossroad_rank must be < branch_len")
    elements = _base_elements(["a1", "a2", "a3", "b1", "b2", "b3"])
    a_bases, b_bases = [0, 1, 2], [3, 4, 5]
    a_ids = list(range(6, 6 + branch_len))
    b_ids = list(range(6 + branch_len, 6 + 2 * branch_len))
    c_ids = list(range(6 + 2 * branch_len, 6 + 2 * branch_len + merged_len))
    for i, eid in enumerate(a_ids, start=1):
        elements.append(Element(eid, f"A{i}", "A", i, i))
    for i, eid in enumerate(b_ids, start=1):
        elements.append(Element(eid, f"B{i}", "B", i, i))
    c_base_level = 2 * crossroad_rank
    for i, eid in enumerate(c_ids, start=1):
        elements.append(Element(eid, f"C{i}", "C", i, c_base_level + i))
    entries: dict[tuple[int, int], int] = {}
    _chain_recipes(entries, (0, 1), a_ids, a_bases)
    _chain_recipes(entries, (3, 4), b_ids, b_bases)
    cross = (a_ids[crossroad_rank - 1], b_ids[crossroad_rank - 1])
    _chain_recipes(entries, cross, c_ids, a_bases + b_bases)
    rewards = {eid: float(elements[eid].level) for eid in a_ids + b_ids}
    # Shift C above every branch reward; levels alone cannot do that because
    # C1 sits below the branch terminals in level.
    rewards.update({eid: float(elements[eid].level + branch_len) for eid in c_ids})
    if horizon is None:
        horizon = 2 * (2 * crossroad_rank + merged_len)
    name = f"merging_paths-{branch_len}-{crossroad_rank}-{merged_len}"
    return _finish(name, elements, entries, a_bases + b_bases, rewards, horizon)


def build_best_of_n(
    n_paths: int = 10,
    optimal_len: int = 5,
    suboptimal_len: int = 4,
    optimal_index: int = 1,
    dominance_scale: float = 1.5,
    horizon: int | None = None,
) -> TaskSpec:
    """n disjoint paths, each on its own 3-element initial set; exactly one is
    longer and has its rewards scaled so it strictly dominates the rest."""
    if n_paths < 2:
        raise ValueError("n_paths must be >= 2")
    if optimal_len <= suboptimal_len:
        raise ValueError("optimal_len must exceed suboptimal_len")
    if not 0 <= optimal_index < n_paths:
        raise ValueError("optimal_index out of range")
    if dominance_scale < 1.0:
        raise ValueError("dominance_scale must be >= 1")
    labels = [chr(ord("A") + p) for p in range(n_paths)]
    elements = _base_elements([f"{lab.lower()}{j}" for lab in labels for j in (1, 2, 3)])
    entries: dict[tuple[int, int], int] = {}
    rewards: dict[int, float] = {}
    next_id = 3 * n_paths
    for p, lab in enumerate(labels):
        length = optimal_len if p == optimal_index else suboptimal_len
        scale = dominance_scale if p == optimal_index else 1.0
        bases = [3 * p, 3 * p + 1, 3 * p + 2]
        path_ids = list(range(next_id, next_id + length))
        next_id += length
        for i, eid in enumerate(path_ids, start=1):
            elements.append(Element(eid, f"{lab}{i}", lab, i, i))
            rewards[eid] = scale * i
        _chain_recipes(entries, (bases[0], bases[1]), path_ids, bases)
    if horizon is None:
        horizon = 2 * optimal_len
    initial = list(range(3 * n_paths))
    name = f"best_of_n-{n_paths}-{optimal_len}-{suboptimal_len}"
    return _finish(name, elements, entries, initial, rewards, horizon)


# -------------------------------------------------------------- serialization

def task_to_text(task: TaskSpec) -> str:
    """Plain-text dump: header, element table, initial set, recipes, rewards.

    The format is line oriented and documented in the README so external
    tools can consume generated tasks.
    """
    book = task.recipe_book
    lines = [
        f"task {task.name}",
        f"horizon {task.horizon}",
        f"optimal_return {task.optimal_return!r}",
        f"elements {len(book.elements)}",
    ]
    for e in book.elements:
        lines.append(f"element {e.id} {e.name} {e.path} {e.rank} {e.level}")
    lines.append("initial " + " ".join(str(i) for i in book.initial_set))
    for (a, b), out in sorted(book.entries.items(), key=lambda kv: kv[1]):
        lines.append(f"recipe {a} {b} -> {out}")
    for eid in sorted(book.rewards):
        lines.append(f"reward {eid} {book.rewards[eid]!r}")
    return "\n".join(lines) + "\n"


def task_from_text(text: str) -> TaskSpec:
    name = ""
    horizon = 0
    optimal = 0.0
    elements: list[Element] = []
    entries: dict[tuple[int, int], int] = {}
    initial: list[int] = []
    rewards: dict[int, float] = {}
    for raw in text.splitlines():
        line = raw.strip()
        if not line:
            continue
        kind, _, rest = line.partition(" ")
        fields = rest.split()
        if kind == "task":
            name = rest
        elif kind == "horizon":
            horizon = int(rest)
        elif kind == "optimal_return":
            optimal = float(rest)
        elif kind == "element":
            elements.append(
                Element(int(fields[0]), fields[1], fields[2], int(fields[3]), int(fields[4]))
            )
        elif kind == "initial":
            initial = [int(f) for f in fields]
        elif kind == "recipe":
            entries[(int(fields[0]), int(fields[1]))] = int(fields[3])
        elif kind == "reward":
            rewards[int(fields[0])] = float(fields[1])
        elif kind != "elements":
            raise ValueError(f"unrecognized line: {line!r}")
    book = RecipeBook(elements, entries, initial, rewards)
    book.validate()
    task = TaskSpec(name, book, horizon)
    task.optimal_return = optimal
    return task


def save_task(task: TaskSpec, path: str | os.PathLike) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(task_to_text(task))


def load_task(path: str | os.PathLike) -> TaskSpec:
    with open(path, encoding="utf-8") as fh:
        return task_from_text(fh.read())
