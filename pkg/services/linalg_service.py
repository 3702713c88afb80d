"""Exact rank and echelon computations over ℚ.

Ranks of large spanning sets go through sympy's DomainMatrix over QQ, which
eliminates fraction-free on the integer-cleared rows. ``EchelonBasis`` keeps an
incremental, labelled echelon form used to choose quotient bases and to read off
coordinates of new vectors in them.
"""

import bisect
import logging

from fractions import Fraction
from sympy import QQ
from sympy.polys.matrices import DomainMatrix
from utils.exceptions import ConfigurationError
from typing import Dict, Hashable, Iterable, List, Mapping, Optional, Tuple

logger = logging.getLogger(__name__)

SparseVector = Mapping[Hashable, Fraction]


def _dedupe(vectors: Iterable[SparseVector]) -> List[Dict[Hashable, Fraction]]:
    seen = set()
    unique = []
    for vector in vectors:
        cleaned = {k: Fraction(v) for k, v in vector.items() if v != 0}
        if not cleaned:
            continue
        # scale so the first column (in sorted order) has coefficient 1
        lead = cleaned[min(cleaned, key=_column_sort_key)]
        key = frozenset((k, v / lead) for k, v in cleaned.items())
        if key in seen:
            continue
        seen.add(key)
        unique.append(cleaned)
    return unique


def _column_sort_key(column):
    return column


def domain_matrix(
    vectors: Iterable[SparseVector], columns: Optional[List[Hashable]] = None
) -> Tuple[DomainMatrix, List[Hashable]]:
    """Sparse DomainMatrix over QQ with one row per vector."""
    rows = [dict(v) for v in vectors]
    if columns is None:
        columns = sorted({k for row in rows for k in row}, key=_column_sort_key)
    index = {column: j for j, column in enumerate(columns)}
    data = {}
    for i, row in enumerate(rows):
        entries = {}
        for column, value in row.items():
            value = Fraction(value)
            if value:
                entries[index[column]] = QQ(value.numerator, value.denominator)
        if entries:
            data[i] = entries
    return DomainMatrix(data, (len(rows), len(columns)), QQ), columns


def rank(vectors: Iterable[SparseVector]) -> int:
    """Exact rank of the span of sparse rational vectors."""
    unique = _dedupe(vectors)
    if not unique:
        return 0
    matrix, columns = domain_matrix(unique)
    if not columns:
        return 0
    result = matrix.rank()
    logger.debug(f"rank of {len(unique)} x {len(columns)} matrix = {result}")
    return int(result)


def contains(spanning: List[SparseVector], vector: SparseVector) -> bool:
    """Whether ``vector`` lies in the span of ``spanning``."""
    return rank(list(spanning) + [vector]) == rank(spanning)


class EchelonBasis:
    """Incrementally built echelon form with labelled basis members.

    Rows are either relations (spanning a subspace to quotient by) or basis
    candidates. A candidate independent of everything added so far becomes a basis
    member; ``coordinates`` expresses any vector of the total span in terms of the
    basis members modulo the relations.
    """

    def __init__(self, sort_key=None):
        self._key = sort_key or _column_sort_key
        self._pivots: List = []
        self._pivot_keys: List = []
        self._rows: Dict[Hashable, Tuple[Dict[Hashable, Fraction], Dict[int, Fraction]]] = {}
        self.labels: List[Hashable] = []
        self.vectors: List[Dict[Hashable, Fraction]] = []
        self.relation_rank = 0

    def __len__(self) -> int:
        return len(self.labels)

    def _reduce(self, vector: SparseVector) -> Tuple[Dict, Dict[int, Fraction]]:
        residue = {k: Fraction(v) for k, v in vector.items() if v != 0}
        combination: Dict[int, Fraction] = {}
        for pivot in self._pivots:
            factor = residue.get(pivot)
            if not factor:
                continue
            row, row_combination = self._rows[pivot]
            for column, value in row.items():
                updated = residue.get(column, 0) - factor * value
                if updated:
                    residue[column] = updated
                else:
                    residue.pop(column, None)
            for index, value in row_combination.items():
                updated = combination.get(index, 0) + factor * value
                if updated:
                    combination[index] = updated
                else:
                    combination.pop(index, None)
        return residue, combination

    def _insert(self, residue: Dict, combination: Dict[int, Fraction]):
        pivot = min(residue, key=self._key)
        lead = residue[pivot]
        row = {k: v / lead for k, v in residue.items()}
        row_combination = {k: v / lead for k, v in combination.items()}
        position = bisect.bisect(self._pivot_keys, self._key(pivot))
        self._pivot_keys.insert(position, self._key(pivot))
        self._pivots.insert(position, pivot)
        self._rows[pivot] = (row, row_combination)

    def add_relation(self, vector: SparseVector) -> bool:
        residue, combination = self._reduce(vector)
        if not residue:
            return False
        # a relation is zero in the quotient, so its residue is -Σ c_r row_r there
        self._insert(residue, {k: -v for k, v in combination.items()})
        self.relation_rank += 1
        return True

    def add(self, vector: SparseVector, label: Hashable) -> bool:
        """Try to add a basis member; returns False if dependent modulo the span."""
        residue, combination = self._reduce(vector)
        if not residue:
            return False
        index = len(self.labels)
        self.labels.append(label)
        self.vectors.append({k: Fraction(v) for k, v in vector.items() if v != 0})
        # residue = vector - Σ c_r row_r, and each row is a combination of members
        combination = {k: -v for k, v in combination.items()}
        combination[index] = Fraction(1)
        self._insert(residue, combination)
        return True

    def coordinates(self, vector: SparseVector) -> Dict[int, Fraction]:
        """Coordinates modulo relations; raises if the vector leaves the span."""
        residue, combination = self._reduce(vector)
        if residue:
            raise ConfigurationError("Vector does not lie in the span of the basis")
        return combination

    def in_relation_span(self, vector: SparseVector) -> bool:
        residue, combination = self._reduce(vector)
        return not residue and not combination

    def reduce(self, vector: SparseVector) -> Dict[Hashable, Fraction]:
        """Residue of ``vector`` after elimination against every stored row."""
        residue, _ = self._reduce(vector)
        return residue


def nullspace(vectors: List[SparseVector]) -> List[Dict[int, Fraction]]:
    """Basis of the linear relations Σ c_k v_k = 0 among the given vectors."""
    if not vectors:
        return []
    matrix, columns = domain_matrix(vectors)
    if not columns:
        return [{k: Fraction(1)} for k in range(len(vectors))]
    kernel = matrix.transpose().nullspace()
    rows, width = kernel.shape
    dense = kernel.to_Matrix()
    result = []
    for r in range(rows):
        combination = {}
        for k in range(width):
            value = dense[r, k]
            if value != 0:
                combination[k] = Fraction(int(value.p), int(value.q))
        result.append(combination)
    logger.debug(f"nullspace of {len(vectors)} vectors has dimension {len(result)}")
    return result
