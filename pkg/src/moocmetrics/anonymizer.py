"""De-identification of tabular exports.

Techniques: keyed hashing, suppression, masking, value swapping, numeric
noising, k-anonymity over generalization hierarchies, and re-identification
codes kept in a separate key store. Every technique preserves column count
and order; only k-anonymity may remove rows (suppression, exactly counted).
All seeded or keyed outputs are byte-identical for identical inputs and
parameters.

Hierarchy files hold one comma-separated generalization chain per distinct
leaf value, all chains the same length, level 0 being the leaf itself::

    81667,8166*,816**,81***,8****,*****
    34,<50,*
"""

from __future__ import annotations

import hmac
import hashlib
import itertools
import json
import logging
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Sequence, Union

import numpy as np

from .errors import (
    DuplicateLeaf,
    KeyStoreCollision,
    MissingHierarchyValue,
    NonNumericCell,
    UnevenChains,
    Unsatisfiable,
)
from .tabular import Table, load_table, parse_csv  # re-exported table surface

__all__ = [
    "Table", "load_table", "parse_csv", "Hierarchy", "load_hierarchy",
    "parse_hierarchy", "apply_hashing", "apply_suppression", "apply_masking",
    "apply_swapping", "apply_noising", "k_anonymize", "verify_k_anonymity",
    "assign_codes", "decode_codes", "AnonymizationRecipe", "apply_recipe",
    "KAnonymityResult", "VerifyResult",
]

log = logging.getLogger(__name__)

ColumnGroup = Union[str, Sequence[str]]
_JOINT_SEP = "\x1f"


def _groups(cols: Sequence[ColumnGroup]) -> list[list[str]]:
    return [[g] if isinstance(g, str) else list(g) for g in cols]


def apply_hashing(t: Table, cols: Sequence[ColumnGroup], key: str,
                  truncation: int = 10) -> Table:
    """Replace cells with a truncated keyed digest (HMAC-SHA256 hex).

    A group of column names is hashed as one joint identifier: the cells are
    concatenated before hashing and every column in the group receives the
    joint digest, so linking attacks on either column alone see one token.
    """
    if not key:
        raise ValueError("hashing key must be non-empty")
    out = t.copy()
    for group in _groups(cols):
        idxs = [out.column_index(c) for c in group]
        for row in out.rows:
            material = _JOINT_SEP.join(row[i] for i in idxs)
            digest = hmac.new(key.encode(), material.encode(), hashlib.sha256).hexdigest()
            for i in idxs:
                row[i] = digest[:truncation]
    return out


def apply_suppression(t: Table, cols: Sequence[str],
                      numeric_cols: Sequence[str] = ()) -> Table:
    """Remove cell contents: strings become ``null``, numeric columns ``0``."""
    out = t.copy()
    numeric = set(numeric_cols)
    for col in cols:
        i = out.column_index(col)
        token = "0" if col in numeric else "null"
        for row in out.rows:
            row[i] = token
    return out


def apply_masking(t: Table, cols: Sequence[str], mask_char: str = "$",
                  mode: str = "preserve_length", fixed_length: int = 8) -> Table:
    """Overwrite cells with the mask character, keeping or fixing the length."""
    out = t.copy()
    for col in cols:
        i = out.column_index(col)
        for row in out.rows:
            length = len(row[i]) if mode == "preserve_length" else fixed_length
            row[i] = mask_char * length
    return out


def apply_swapping(t: Table, cols: Sequence[ColumnGroup], seed: int = 0) -> Table:
    """Permute values down each column group with a seeded shuffle.

    Columns inside one group move together (first and last name stay
    coherent). The shuffle prefers a derangement so values actually move;
    per-column multisets are always preserved. A single-row table cannot be
    swapped and is returned unchanged with a warning.
    """
    out = t.copy()
    n = len(out.rows)
    if n < 2:
        log.warning("swap skipped: table has %d row(s)", n)
        return out
    rng = np.random.default_rng(seed)
    for group in _groups(cols):
        perm = _deranged_permutation(n, rng)
        idxs = [out.column_index(c) for c in group]
        for i in idxs:
            values = [row[i] for row in out.rows]
            for r, row in enumerate(out.rows):
                row[i] = values[perm[r]]
    return out


def _deranged_permutation(n: int, rng: np.random.Generator) -> np.ndarray:
    for _ in range(100):
        perm = rng.permutation(n)
        if not np.any(perm == np.arange(n)):
            return perm
    # settle for any non-identity permutation
    while True:
        perm = rng.permutation(n)
        if np.any(perm != np.arange(n)):
            return perm


def apply_noising(t: Table, cols: Sequence[str], delta: float, seed: int = 0,
                  domain: tuple[float, float] = (0.0, 100.0)) -> Table:
    """Move each numeric cell by ±delta (seeded sign), clamped to the domain.

    A trailing percent sign is tolerated and preserved; integer cells stay
    integers. |out − in| equals delta for every cell before clamping.
    """
    if delta < 0:
        raise ValueError("delta must be >= 0")
    out = t.copy()
    rng = np.random.default_rng(seed)
    for col in cols:
        i = out.column_index(col)
        for r, row in enumerate(out.rows):
            cell = row[i].strip()
            suffix = "%" if cell.endswith("%") else ""
            body = cell[:-1].strip() if suffix else cell
            try:
                value = float(body)
            except ValueError:
                raise NonNumericCell(r, col, row[i]) from None
            sign = 1.0 if rng.integers(0, 2) else -1.0
            noised = min(max(value + sign * delta, domain[0]), domain[1])
            if noised.is_integer() and "." not in body:
                rendered = str(int(noised))
            else:
                rendered = f"{noised:g}"
            row[i] = rendered + suffix
    return out


# ----------------------------------------------------------------------
# k-anonymity over generalization hierarchies


@dataclass
class Hierarchy:
    chains: dict[str, list[str]]  # leaf -> [level0=leaf, ..., levelL]

    @property
    def levels(self) -> int:
        """Most general level index (chain length − 1)."""
        first = next(iter(self.chains.values()))
        return len(first) - 1

    def generalize(self, leaf: str, level: int) -> str:
        return self.chains[leaf][level]


def parse_hierarchy(text: str) -> Hierarchy:
    chains: dict[str, list[str]] = {}
    length = None
    for raw in text.splitlines():
        line = raw.strip()
        if not line:
            continue
        chain = [c.strip() for c in line.split(",")]
        if length is None:
            length = len(chain)
        elif len(chain) != length:
            raise UnevenChains(f"chain for {chain[0]!r} has {len(chain)} levels, expected {length}")
        if chain[0] in chains:
            raise DuplicateLeaf(chain[0])
        chains[chain[0]] = chain
    if not chains:
        raise UnevenChains("hierarchy file is empty")
    return Hierarchy(chains)


def load_hierarchy(path: str | Path) -> Hierarchy:
    return parse_hierarchy(Path(path).read_text(encoding="utf-8"))


@dataclass
class KAnonymityResult:
    table: Table
    chosen_levels: dict[str, int]
    suppressed_row_count: int
    class_sizes: list[int]


def _check_coverage(t: Table, qis: Sequence[str], hierarchies: dict[str, Hierarchy]) -> None:
    for col in qis:
        if col not in hierarchies:
            raise MissingHierarchyValue("<any>", col)
        chains = hierarchies[col].chains
        for value in t.column(col):
            if value not in chains:
                raise MissingHierarchyValue(value, col)


def _node_classes(t: Table, qis: Sequence[str], hierarchies: dict[str, Hierarchy],
                  node: Sequence[int]) -> tuple[list[tuple], Counter]:
    idxs = [t.column_index(c) for c in qis]
    tuples = []
    for row in t.rows:
        tuples.append(tuple(
            hierarchies[col].generalize(row[i], level)
            for col, i, level in zip(qis, idxs, node)
        ))
    return tuples, Counter(tuples)


def k_anonymize(t: Table, qis: Sequence[str], hierarchies: dict[str, Hierarchy],
                k: int, suppression_limit: int = 0) -> KAnonymityResult:
    """Full-domain generalization + row suppression to k-anonymity.

    Searches the whole lattice of per-QI generalization levels and keeps the
    feasible node (every residual equivalence class over the QI tuple has
    size ≥ k after suppressing at most `suppression_limit` rows) minimizing
    the total level sum; level vectors compared lexicographically in QI
    column order break ties. Suppressed rows are removed and counted;
    non-QI columns are untouched.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    _check_coverage(t, qis, hierarchies)
    nodes = itertools.product(*(range(hierarchies[c].levels + 1) for c in qis))
    candidates = sorted(nodes, key=lambda node: (sum(node), node))
    for node in candidates:
        tuples, classes = _node_classes(t, qis, hierarchies, node)
        suppressed = sum(size for size in classes.values() if size < k)
        if suppressed > suppression_limit:
            continue
        keep_tuples = {qi for qi, size in classes.items() if size >= k}
        out = t.copy()
        idxs = [out.column_index(c) for c in qis]
        rows = []
        sizes = Counter()
        for row, qi_tuple in zip(out.rows, tuples):
            if qi_tuple not in keep_tuples:
                continue
            for col_i, value in zip(idxs, qi_tuple):
                row[col_i] = value
            rows.append(row)
            sizes[qi_tuple] += 1
        out.rows = rows
        return KAnonymityResult(
            out,
            dict(zip(qis, node)),
            suppressed,
            sorted(sizes.values()),
        )
    raise Unsatisfiable(
        f"no generalization reaches k={k} within {suppression_limit} suppressed rows"
    )


@dataclass
class VerifyResult:
    ok: bool
    violations: list[tuple[tuple, int]]  # (QI tuple, class size < k)


def verify_k_anonymity(t: Table, qis: Sequence[str], k: int) -> VerifyResult:
    """Group rows by QI tuple and report classes smaller than k."""
    idxs = [t.column_index(c) for c in qis]
    classes = Counter(tuple(row[i] for i in idxs) for row in t.rows)
    violations = sorted(
        (qi, size) for qi, size in classes.items() if size < k
    )
    return VerifyResult(not violations, violations)


# ----------------------------------------------------------------------
# re-identification codes


def _load_key_store(path: Path) -> dict:
    if path.exists():
        store = json.loads(path.read_text(encoding="utf-8"))
    else:
        store = {}
    for col, mapping in store.items():
        seen: dict[str, str] = {}
        for original, code in mapping.items():
            if code in seen and seen[code] != original:
                raise KeyStoreCollision(code)
            seen[code] = original
    return store


def assign_codes(t: Table, id_cols: Sequence[str], key_store_path: str | Path) -> Table:
    """Replace identifier cells with stable opaque codes.

    The code→original mapping lives only in the key store file; recoding
    against the same store reuses codes, so the same identifier always maps
    to the same code. Separate stores yield independent code spaces.
    """
    path = Path(key_store_path)
    store = _load_key_store(path)
    out = t.copy()
    for col in id_cols:
        mapping = store.setdefault(col, {})
        i = out.column_index(col)
        for row in out.rows:
            original = row[i]
            if original not in mapping:
                mapping[original] = f"C{len(mapping) + 1:06d}"
            row[i] = mapping[original]
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(store, indent=2, sort_keys=True), encoding="utf-8")
    return out


def decode_codes(t: Table, id_cols: Sequence[str], key_store_path: str | Path) -> Table:
    """Authorized re-identification: map codes back to originals."""
    store = _load_key_store(Path(key_store_path))
    out = t.copy()
    for col in id_cols:
        reverse = {code: original for original, code in store.get(col, {}).items()}
        i = out.column_index(col)
        for row in out.rows:
            row[i] = reverse.get(row[i], row[i])
    return out


# ----------------------------------------------------------------------
# recipe (configuration file) surface

TECHNIQUES = ("hash", "suppress", "mask", "swap", "noise", "k-anonymity", "code")


@dataclass
class AnonymizationRecipe:
    technique: str
    columns: list = field(default_factory=list)  # names or joint groups
    key: str = ""
    truncation: int = 10
    mask_char: str = "$"
    mask_mode: str = "preserve_length"
    fixed_length: int = 8
    delta: float = 0.0
    seed: int = 0
    domain: tuple[float, float] = (0.0, 100.0)
    numeric_columns: list[str] = field(default_factory=list)
    k: int = 2
    quasi_identifiers: list[str] = field(default_factory=list)
    hierarchy_paths: dict[str, str] = field(default_factory=dict)
    suppression_limit: int = 0
    key_store: str = ""

    @classmethod
    def from_json(cls, text: str) -> "AnonymizationRecipe":
        doc = json.loads(text)
        recipe = cls(**doc)
        recipe.validate()
        return recipe

    def validate(self) -> None:
        if self.technique not in TECHNIQUES:
            raise ValueError(f"unknown technique: {self.technique!r}")
        if self.technique == "k-anonymity" and self.k < 2:
            raise ValueError("k must be >= 2")
        if self.technique == "noise" and self.delta <= 0:
            raise ValueError("noise delta must be > 0")
        if self.technique == "hash" and not self.key:
            raise ValueError("hashing requires a key")
        if self.technique == "code" and not self.key_store:
            raise ValueError("coding requires a key store path")


def apply_recipe(t: Table, recipe: AnonymizationRecipe) -> Table:
    """Dispatch a recipe to its technique; returns the anonymized table."""
    missing = [
        c for g in _groups(recipe.columns or recipe.quasi_identifiers) for c in g
        if c not in t.header
    ]
    if missing:
        raise ValueError(f"target columns not in table: {missing}")
    if recipe.technique == "hash":
        return apply_hashing(t, recipe.columns, recipe.key, recipe.truncation)
    if recipe.technique == "suppress":
        return apply_suppression(t, recipe.columns, recipe.numeric_columns)
    if recipe.technique == "mask":
        return apply_masking(t, recipe.columns, recipe.mask_char,
                             recipe.mask_mode, recipe.fixed_length)
    if recipe.technique == "swap":
        return apply_swapping(t, recipe.columns, recipe.seed)
    if recipe.technique == "noise":
        return apply_noising(t, recipe.columns, recipe.delta, recipe.seed, recipe.domain)
    if recipe.technique == "k-anonymity":
        hierarchies = {col: load_hierarchy(path)
                       for col, path in recipe.hierarchy_paths.items()}
        return k_anonymize(t, recipe.quasi_identifiers, hierarchies,
                           recipe.k, recipe.suppression_limit).table
    if recipe.technique == "code":
        return assign_codes(t, recipe.columns, recipe.key_store)
    raise ValueError(f"unknown technique: {recipe.technique!r}")
