"""Pants blocks and Fenchel-Nielsen surface descriptions."""

from __future__ import annotations

import enum
import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

LENGTH_RTOL = 1e-12


class UnsupportedTopology(ValueError):
    """Raised for topologies outside the orientable pipeline (Moebius blocks)."""


class SurfaceError(ValueError):
    """Raised for inconsistent surface descriptions."""


class BlockKind(str, enum.Enum):
    THREE_HOLES = "ThreeHoles"
    TWO_HOLES_ONE_CUSP = "TwoHolesOneCusp"
    ONE_HOLE_TWO_CUSPS = "OneHoleTwoCusps"
    THREE_CUSPS = "ThreeCusps"

    @property
    def n_cusps(self) -> int:
        return {
            BlockKind.THREE_HOLES: 0,
            BlockKind.TWO_HOLES_ONE_CUSP: 1,
            BlockKind.ONE_HOLE_TWO_CUSPS: 2,
            BlockKind.THREE_CUSPS: 3,
        }[self]

    @classmethod
    def parse(cls, name: str) -> "BlockKind":
        for kind in cls:
            if kind.value.lower() == str(name).lower():
                return kind
        if "mobius" in str(name).lower() or "möbius" in str(name).lower():
            raise UnsupportedTopology("Moebius blocks are not supported (orientable blocks only)")
        raise SurfaceError(f"unknown block kind {name!r}")


@dataclass(frozen=True)
class PantsBlock:
    """A pair of pants; ``lengths[slot]`` is the boundary length or ``None`` for a cusp."""

    kind: BlockKind
    lengths: tuple[float | None, float | None, float | None]

    def __post_init__(self) -> None:
        if len(self.lengths) != 3:
            raise SurfaceError("a pants block has exactly three slots")
        cusps = sum(v is None for v in self.lengths)
        if cusps != self.kind.n_cusps:
            raise SurfaceError(f"{self.kind.value} needs {self.kind.n_cusps} cusp slots, got {cusps}")
        for v in self.lengths:
            if v is not None and not (v > 0 and math.isfinite(v)):
                raise SurfaceError(f"boundary lengths must be positive, got {v}")

    @classmethod
    def holes(cls, l1: float, l2: float, l3: float) -> "PantsBlock":
        return cls(BlockKind.THREE_HOLES, (float(l1), float(l2), float(l3)))

    @property
    def euler_characteristic(self) -> int:
        return -1

    def is_cusp(self, slot: int) -> bool:
        return self.lengths[slot] is None


Slot = tuple[int, int]


@dataclass(frozen=True)
class Gluing:
    a: Slot
    b: Slot
    twist: float = 0.0


@dataclass(frozen=True)
class FNSurface:
    """Surface assembled from pants blocks glued along equal-length boundary slots."""

    blocks: tuple[PantsBlock, ...]
    gluings: tuple[Gluing, ...] = ()
    labels: dict = field(default_factory=dict, compare=False, hash=False)

    def __post_init__(self) -> None:
        object.__setattr__(self, "blocks", tuple(self.blocks))
        object.__setattr__(self, "gluings", tuple(self.gluings))
        self.validate()

    def validate(self) -> None:
        if not self.blocks:
            raise SurfaceError("a surface needs at least one block")
        seen: set[Slot] = set()
        for g in self.gluings:
            for b, s in (g.a, g.b):
                if not (0 <= b < len(self.blocks)) or s not in (0, 1, 2):
                    raise SurfaceError(f"slot {(b, s)} does not exist")
                if (b, s) in seen:
                    raise SurfaceError(f"slot {(b, s)} is glued twice")
                if self.blocks[b].is_cusp(s):
                    raise SurfaceError(f"slot {(b, s)} is a cusp and cannot be glued")
                seen.add((b, s))
            la, lb = self.length(g.a), self.length(g.b)
            if abs(la - lb) > LENGTH_RTOL * max(la, lb):
                raise SurfaceError(f"glued slots {g.a} and {g.b} have lengths {la} != {lb}")
        if len(self.blocks) > 1 and any(b.kind is BlockKind.THREE_CUSPS for b in self.blocks):
            raise SurfaceError("a thrice-punctured sphere block must be the whole surface")
        if not self.is_connected(self.gluings):
            raise SurfaceError("the gluing graph is not connected")

    def is_connected(self, gluings: Iterable[Gluing]) -> bool:
        parent = list(range(len(self.blocks)))

        def find(i: int) -> int:
            while parent[i] != i:
                parent[i] = parent[parent[i]]
                i = parent[i]
            return i

        for g in gluings:
            parent[find(g.a[0])] = find(g.b[0])
        return len({find(i) for i in range(len(self.blocks))}) == 1

    def length(self, slot: Slot) -> float:
        v = self.blocks[slot[0]].lengths[slot[1]]
        if v is None:
            raise SurfaceError(f"slot {slot} is a cusp")
        return v

    @property
    def cusps(self) -> list[Slot]:
        return [(b, s) for b, blk in enumerate(self.blocks) for s in range(3) if blk.is_cusp(s)]

    @property
    def free_boundaries(self) -> list[Slot]:
        glued = {g.a for g in self.gluings} | {g.b for g in self.gluings}
        return [
            (b, s)
            for b, blk in enumerate(self.blocks)
            for s in range(3)
            if not blk.is_cusp(s) and (b, s) not in glued
        ]

    @property
    def is_closed(self) -> bool:
        return not self.free_boundaries and not self.cusps

    @property
    def euler_characteristic(self) -> int:
        return -len(self.blocks)

    def signature(self) -> tuple[int, int, int]:
        """``(genus, punctures, holes)`` recovered from the block count."""
        p, q = len(self.cusps), len(self.free_boundaries)
        twice_genus = 2 - p - q - self.euler_characteristic
        return twice_genus // 2, p, q

    def is_separating(self, index: int) -> bool:
        rest = [g for i, g in enumerate(self.gluings) if i != index]
        return not self.is_connected(rest)

    def curve_lengths(self) -> list[float]:
        return [self.length(g.a) for g in self.gluings]

    # -- serialisation -----------------------------------------------------

    def to_dict(self) -> dict:
        return {
            "blocks": [
                {"kind": blk.kind.value, "lengths": list(blk.lengths)} for blk in self.blocks
            ],
            "gluings": [
                {"from": list(g.a), "to": list(g.b), "twist": g.twist} for g in self.gluings
            ],
            "cusps": [list(c) for c in self.cusps],
        }

    @classmethod
    def from_dict(cls, data: dict) -> "FNSurface":
        cusp_slots = {tuple(c) for c in data.get("cusps", [])}
        blocks = []
        for b, entry in enumerate(data["blocks"]):
            kind = BlockKind.parse(entry["kind"])
            raw = list(entry.get("lengths", []))
            if len(raw) == 3:
                lengths = [None if v is None else float(v) for v in raw]
            else:
                # short form: hole lengths only, cusps taken from the cusp list or trailing slots
                marked = sorted(s for bb, s in cusp_slots if bb == b)
                if not marked:
                    marked = list(range(3 - kind.n_cusps, 3))
                it = iter(float(v) for v in raw)
                lengths = [None if s in marked else next(it, None) for s in range(3)]
            blocks.append(PantsBlock(kind, tuple(lengths)))
        gluings = [
            Gluing(tuple(g["from"]), tuple(g["to"]), float(g.get("twist", 0.0)))
            for g in data.get("gluings", [])
        ]
        surface = cls(tuple(blocks), tuple(gluings))
        if cusp_slots and cusp_slots != set(surface.cusps):
            raise SurfaceError(f"cusp list {sorted(cusp_slots)} does not match cusp slots {surface.cusps}")
        return surface

    @classmethod
    def load(cls, path: str | Path) -> "FNSurface":
        with open(path) as fh:
            return cls.from_dict(json.load(fh))

    def dump(self, path: str | Path) -> None:
        with open(path, "w") as fh:
            json.dump(self.to_dict(), fh, indent=2)


def theta_genus2(lengths: Sequence[float], twists: Sequence[float] = (0.0, 0.0, 0.0)) -> FNSurface:
    """Genus-2 surface from two pants glued slot-to-slot along all three curves."""
    l1, l2, l3 = lengths
    blocks = (PantsBlock.holes(l1, l2, l3), PantsBlock.holes(l1, l2, l3))
    gluings = tuple(Gluing((0, s), (1, s), float(twists[s])) for s in range(3))
    return FNSurface(blocks, gluings)


def chain_surface(genus: int, ell: float, twists: Sequence[float] | None = None) -> FNSurface:
    """Closed genus-``genus`` surface with every pants curve of length ``ell``.

    Blocks ``0 .. 2g-3`` form a chain; the two end blocks carry a
    self-glued handle and inner blocks are joined by double edges, giving
    ``3g - 3`` curves.
    """
    if genus < 2:
        raise SurfaceError("genus must be at least 2")
    n = 2 * genus - 2
    blocks = tuple(PantsBlock.holes(ell, ell, ell) for _ in range(n))
    if genus == 2:
        gl = [((0, 0), (1, 0)), ((0, 1), (1, 1)), ((0, 2), (1, 2))]
    else:
        gl = [((0, 1), (0, 2))]
        # inner chain: block i slot 0 -> block i+1 slot 0 (odd steps double up)
        for i in range(n - 1):
            if i % 2 == 0:
                gl.append(((i, 0), (i + 1, 0)))
            else:
                gl.append(((i, 1), (i + 1, 1)))
                gl.append(((i, 2), (i + 1, 2)))
        last = n - 1
        gl.append(((last, 1), (last, 2)))
    tw = list(twists) if twists is not None else [0.0] * len(gl)
    if len(tw) != len(gl):
        raise SurfaceError(f"expected {len(gl)} twists, got {len(tw)}")
    return FNSurface(blocks, tuple(Gluing(a, b, float(t)) for (a, b), t in zip(gl, tw)))
