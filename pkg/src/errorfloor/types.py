"""Common types and dataclasses for the errorfloor toolkit."""

from dataclasses import dataclass, field
from typing import Any, Dict, Iterable, List, Sequence, Tuple, Union

import numpy as np

from errorfloor.errors import InputError, LengthMismatchError


@dataclass(frozen=True)
class BinaryVector:
    """Binary vector stored as its length and sorted support."""

    length: int
    support: Tuple[int, ...]

    def __post_init__(self) -> None:
        if self.length < 0:
            raise InputError("BinaryVector length must be non-negative")
        support = tuple(sorted(set(int(i) for i in self.support)))
        if support and (support[0] < 0 or support[-1] >= self.length):
            raise InputError(
                f"support index out of range for length {self.length}"
            )
        object.__setattr__(self, "support", support)

    @classmethod
    def zeros(cls, length: int) -> "BinaryVector":
        """All-zero vector."""
        return cls(length=length, support=())

    @classmethod
    def from_support(
        cls, length: int, support: Iterable[int]
    ) -> "BinaryVector":
        """Create from a collection of one positions."""
        return cls(length=length, support=tuple(support))

    @classmethod
    def from_array(cls, bits: Sequence[int]) -> "BinaryVector":
        """Create from a 0/1 sequence."""
        arr = np.asarray(bits)
        return cls(
            length=int(arr.shape[0]),
            support=tuple(int(i) for i in np.flatnonzero(arr)),
        )

    def to_array(self) -> np.ndarray:
        """Dense uint8 representation."""
        arr = np.zeros(self.length, dtype=np.uint8)
        if self.support:
            arr[list(self.support)] = 1
        return arr

    def xor(self, other: "BinaryVector") -> "BinaryVector":
        """Component-wise sum modulo two."""
        if other.length != self.length:
            raise LengthMismatchError(
                f"length {other.length} does not match {self.length}"
            )
        return BinaryVector(
            length=self.length,
            support=tuple(set(self.support) ^ set(other.support)),
        )

    @property
    def weight(self) -> int:
        """Hamming weight."""
        return len(self.support)

    @property
    def is_zero(self) -> bool:
        """True for the all-zero vector."""
        return not self.support


BitsLike = Union[BinaryVector, Sequence[int], np.ndarray]


def as_bits(value: BitsLike, length: int) -> np.ndarray:
    """Dense uint8 view of a binary input, checked against a length."""
    if isinstance(value, BinaryVector):
        arr = value.to_array()
    else:
        arr = (np.asarray(value) != 0).astype(np.uint8)
    if arr.ndim != 1 or arr.shape[0] != length:
        raise LengthMismatchError(
            f"vector length {arr.shape[0] if arr.ndim else 0} "
            f"does not match code length {length}"
        )
    return arr


def as_reals(value: Sequence[float], length: int) -> np.ndarray:
    """Float64 copy of a real vector, checked for length and finiteness."""
    arr = np.asarray(value, dtype=np.float64).copy()
    if arr.ndim != 1 or arr.shape[0] != length:
        raise LengthMismatchError(
            f"vector length {arr.shape[0] if arr.ndim else 0} "
            f"does not match code length {length}"
        )
    if not np.all(np.isfinite(arr)):
        raise InputError("vector entries must be finite")
    return arr


@dataclass
class SubgraphClass:
    """All variable sets of size a whose induced subgraph has b odd checks."""

    a: int
    b: int
    members: List[Tuple[int, ...]] = field(default_factory=list)

    @property
    def count(self) -> int:
        """Number of members."""
        return len(self.members)

    def sorted(self) -> "SubgraphClass":
        """Copy with members sorted lexicographically."""
        return SubgraphClass(
            a=self.a,
            b=self.b,
            members=sorted(tuple(sorted(m)) for m in self.members),
        )

    def to_dict(self) -> Dict[str, Any]:
        """JSON-ready export."""
        ordered = self.sorted()
        return {
            "a": self.a,
            "b": self.b,
            "count": ordered.count,
            "members": [list(m) for m in ordered.members],
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "SubgraphClass":
        """Inverse of to_dict."""
        return cls(
            a=int(data["a"]),
            b=int(data["b"]),
            members=[tuple(int(v) for v in m) for m in data["members"]],
        )


@dataclass(frozen=True)
class TrappingSetReport:
    """Variables not eventually corrected by an iterative decoder."""

    support: Tuple[int, ...]
    a: int
    b: int
    window_used: int
    unresolved: bool = False

    def to_dict(self) -> Dict[str, Any]:
        """JSON-ready export."""
        return {
            "a": self.a,
            "b": self.b,
            "support": list(self.support),
            "window_used": self.window_used,
            "unresolved": self.unresolved,
        }
