"""Tornado tabulation hash families: parameterization, build, evaluation.

A hash function here maps ``c`` input characters of ``char_bits`` bits each to
``out_bits`` output bits. The input key is extended with ``d`` derived
characters, each produced by a simple tabulation function of all preceding
characters of the (partially built) derived key, and a top simple tabulation
over all ``c + d`` positions produces the hash. Four variants:

* ``SIMPLE_TABULATION``: d = 0, plain per-position lookup XOR.
* ``SIMPLE_TORNADO``: input characters kept verbatim, d chained derived
  characters.
* ``TORNADO``: as above, plus the last input character is twisted by a
  tabulation of the preceding ones (a bijection on keys).
* ``TORNADO_MIX``: the last two derived characters come from a wider
  alphabet of ``psi_bits`` bits and both depend only on the first
  ``c + d - 2`` characters, so they can be looked up in parallel.

Character order: ``x_1`` is the least significant ``char_bits`` bits of the
key word, and tables are filled by the canonical PRG of :mod:`tornadotab.rng`
in the documented order (levels ascending, positions ascending, slots
ascending, then the top table).
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from . import rng

_U = np.uint64


class ConfigError(ValueError):
    """Invalid hash-family parameterization or unsupported profile."""


class Variant(enum.Enum):
    SIMPLE_TABULATION = "simpletab"
    SIMPLE_TORNADO = "simpletornado"
    TORNADO = "tornado"
    TORNADO_MIX = "tornadomix"


@dataclass(frozen=True)
class TornadoSpec:
    """Full parameterization of one hash family."""

    char_bits: int
    c: int
    d: int
    out_bits: int
    variant: Variant
    psi_bits: int | None = None

    def __post_init__(self) -> None:
        if not 1 <= self.char_bits <= 16:
            raise ConfigError(f"char_bits must be in 1..16, got {self.char_bits}")
        if self.c < 1:
            raise ConfigError(f"c must be >= 1, got {self.c}")
        if self.d < 0:
            raise ConfigError(f"d must be >= 0, got {self.d}")
        if self.char_bits * self.c > 64:
            raise ConfigError("key does not fit a 64-bit word")
        if not 1 <= self.out_bits <= 64:
            raise ConfigError(f"out_bits must be in 1..64, got {self.out_bits}")
        if self.variant is Variant.TORNADO_MIX:
            if self.d < 2:
                raise ConfigError("tornado-mix needs d >= 2")
            if self.psi_bits is None or self.psi_bits < self.char_bits:
                raise ConfigError("tornado-mix needs psi_bits >= char_bits")
            if self.psi_bits > 20:
                raise ConfigError("psi_bits > 20 not supported (table memory)")
        else:
            if self.psi_bits is not None:
                raise ConfigError("psi_bits only applies to tornado-mix")
            if self.variant is Variant.SIMPLE_TABULATION and self.d != 0:
                raise ConfigError("simple tabulation requires d = 0")

    @property
    def sigma(self) -> int:
        return 1 << self.char_bits

    @property
    def psi(self) -> int:
        if self.psi_bits is None:
            raise ConfigError("psi is only defined for tornado-mix")
        return 1 << self.psi_bits

    @property
    def key_bits(self) -> int:
        return self.char_bits * self.c

    @property
    def positions(self) -> int:
        """Number of derived-key positions, c + d."""
        return self.c + self.d

    def position_bits(self, i: int) -> int:
        """Alphabet width of derived-key position ``i`` (0-based)."""
        if self.variant is Variant.TORNADO_MIX and i >= self.c + self.d - 2:
            return self.psi_bits  # type: ignore[return-value]
        return self.char_bits

    def levels(self) -> tuple[int, ...]:
        """Level indices that own a lookup table, in canonical order."""
        if self.variant is Variant.SIMPLE_TABULATION:
            return ()
        if self.variant is Variant.SIMPLE_TORNADO:
            return tuple(range(1, self.d + 1))
        return tuple(range(0, self.d + 1))

    def level_input_positions(self, level: int) -> int:
        """How many prefix characters feed the level's tabulation."""
        if level == 0:
            return self.c - 1
        if self.variant is Variant.TORNADO_MIX and level >= self.d - 1:
            return self.c + self.d - 2
        return self.c + level - 1

    def level_output_bits(self, level: int) -> int:
        if self.variant is Variant.TORNADO_MIX and level >= self.d - 1:
            return self.psi_bits  # type: ignore[return-value]
        return self.char_bits

    def spec_string(self) -> str:
        s = f"{self.variant.value},cb={self.char_bits},c={self.c},d={self.d},r={self.out_bits}"
        if self.psi_bits is not None:
            s += f",psi={self.psi_bits}"
        return s


def parse_spec_string(text: str) -> TornadoSpec:
    """Inverse of :meth:`TornadoSpec.spec_string`."""
    parts = text.strip().split(",")
    try:
        variant = Variant(parts[0])
        fields = dict(p.split("=", 1) for p in parts[1:])
        return TornadoSpec(
            char_bits=int(fields["cb"]),
            c=int(fields["c"]),
            d=int(fields["d"]),
            out_bits=int(fields["r"]),
            variant=variant,
            psi_bits=int(fields["psi"]) if "psi" in fields else None,
        )
    except (KeyError, ValueError, IndexError) as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(f"bad spec string {text!r}") from exc


def build_level_tables(spec: TornadoSpec, seed: int) -> dict[int, np.ndarray]:
    """Per-level character tables, ``level -> (positions, sigma)`` uint64."""
    tables: dict[int, np.ndarray] = {}
    for level in spec.levels():
        npos = spec.level_input_positions(level)
        mask = _U((1 << spec.level_output_bits(level)) - 1)
        pos = np.repeat(np.arange(npos, dtype=np.uint64), spec.sigma)
        slot = np.tile(np.arange(spec.sigma, dtype=np.uint64), npos)
        vals = rng.field_value_vec(seed, rng.KIND_LEVEL, level, pos, slot) & mask
        tables[level] = vals.reshape(npos, spec.sigma)
    for t in tables.values():
        t.flags.writeable = False
    return tables


def build_top_table(spec: TornadoSpec, seed: int) -> list[np.ndarray]:
    """Top simple-tabulation table, one array per derived-key position."""
    mask = _U(((1 << spec.out_bits) - 1) & rng.M64)
    out: list[np.ndarray] = []
    for i in range(spec.positions):
        size = 1 << spec.position_bits(i)
        slots = np.arange(size, dtype=np.uint64)
        vals = rng.field_value_vec(seed, rng.KIND_TOP, 0, i, slots) & mask
        vals.flags.writeable = False
        out.append(vals)
    return out


class TornadoHash:
    """An instantiated tornado tabulation hash function.

    Immutable after construction; safe to share across threads. Normally
    created through :meth:`build`; the direct constructor exists for tests
    that need hand-crafted tables.
    """

    __slots__ = ("spec", "seed", "level_tables", "top_table", "_folded")

    def __init__(
        self,
        spec: TornadoSpec,
        seed: int,
        level_tables: dict[int, np.ndarray],
        top_table: list[np.ndarray],
    ):
        self.spec = spec
        self.seed = seed
        self.level_tables = level_tables
        self.top_table = top_table
        self._folded: FoldedTables | None = None

    @classmethod
    def build(cls, spec: TornadoSpec, seed: int) -> "TornadoHash":
        return cls(spec, seed, build_level_tables(spec, seed), build_top_table(spec, seed))

    # -- reference (scalar) paths -------------------------------------------

    def input_chars(self, x: int) -> list[int]:
        cb, cmask = self.spec.char_bits, (1 << self.spec.char_bits) - 1
        return [(x >> (i * cb)) & cmask for i in range(self.spec.c)]

    def derive(self, x: int) -> tuple[int, ...]:
        """Derived key of ``x`` as a tuple of c + d characters."""
        spec = self.spec
        chars = self.input_chars(x)
        if spec.variant in (Variant.TORNADO, Variant.TORNADO_MIX):
            t0 = self.level_tables[0]
            acc = 0
            for j in range(spec.c - 1):
                acc ^= int(t0[j, chars[j]])
            chars[spec.c - 1] ^= acc
        for level in range(1, spec.d + 1):
            tbl = self.level_tables[level]
            val = 0
            for j in range(spec.level_input_positions(level)):
                val ^= int(tbl[j, chars[j]])
            chars.append(val)
        return tuple(chars)

    def eval(self, x: int) -> int:
        chars = self.derive(x)
        h = 0
        for i, ch in enumerate(chars):
            h ^= int(self.top_table[i][ch])
        return h

    def select_bits(self, x: int, s: int) -> int:
        """High ``s`` output bits (the selection bits)."""
        if not 0 <= s <= self.spec.out_bits:
            raise ConfigError(f"s must be in 0..{self.spec.out_bits}")
        return self.eval(x) >> (self.spec.out_bits - s)

    def free_bits(self, x: int, t: int) -> int:
        """Low ``t`` output bits (the free bits)."""
        if not 0 <= t <= self.spec.out_bits:
            raise ConfigError(f"t must be in 0..{self.spec.out_bits}")
        return self.eval(x) & ((1 << t) - 1)

    # -- batch paths ---------------------------------------------------------

    def derive_batch(self, xs: np.ndarray) -> np.ndarray:
        """Derived keys of a key array, shape ``(len(xs), c + d)`` uint32."""
        spec = self.spec
        xs = np.asarray(xs, dtype=np.uint64)
        chars = np.empty((len(xs), spec.positions), dtype=np.uint32)
        cmask = _U(spec.sigma - 1)
        for i in range(spec.c):
            chars[:, i] = (xs >> _U(i * spec.char_bits)) & cmask
        if spec.variant in (Variant.TORNADO, Variant.TORNADO_MIX):
            t0 = self.level_tables[0]
            acc = np.zeros(len(xs), dtype=np.uint64)
            for j in range(spec.c - 1):
                acc ^= t0[j][chars[:, j]]
            chars[:, spec.c - 1] ^= acc.astype(np.uint32)
        if spec.variant is not Variant.SIMPLE_TABULATION:
            for level in range(1, spec.d + 1):
                tbl = self.level_tables[level]
                val = np.zeros(len(xs), dtype=np.uint64)
                for j in range(spec.level_input_positions(level)):
                    val ^= tbl[j][chars[:, j]]
                chars[:, spec.c + level - 1] = val.astype(np.uint32)
        return chars

    def eval_batch(self, xs: np.ndarray) -> np.ndarray:
        chars = self.derive_batch(xs)
        h = np.zeros(len(chars), dtype=np.uint64)
        for i in range(self.spec.positions):
            h ^= self.top_table[i][chars[:, i]]
        return h

    # -- folded fast path ----------------------------------------------------

    @property
    def folded(self) -> "FoldedTables":
        if self._folded is None:
            self._folded = fold_tables(self)
        return self._folded

    def eval_folded(self, x: int) -> int:
        return eval_folded(self, x)


@dataclass
class FoldedTables:
    """Packed single-pass tables for the two supported fast-path profiles.

    ``w64``: plain tornado with 8-bit characters, one 64-bit word per entry
    packing (low to high) the not-yet-consumed derived characters then the
    output bits. ``w128mix``: tornado-mix with 8-bit characters and 16-bit
    tail characters, 128-bit entries for the character tables plus two
    psi-indexed output tables.
    """

    profile: str
    tables: list[list[int]]
    tables_np: np.ndarray | None = None
    psi_tables: list[list[int]] | None = None


def folded_profile(spec: TornadoSpec) -> str:
    """Which fast-path profile a spec matches; raises if none."""
    if (
        spec.variant is Variant.TORNADO
        and spec.char_bits == 8
        and 8 * (spec.d + 1) + spec.out_bits <= 64
    ):
        return "w64"
    if (
        spec.variant is Variant.TORNADO_MIX
        and spec.char_bits == 8
        and spec.psi_bits == 16
        and 8 * (spec.d - 1) + 32 + spec.out_bits <= 128
    ):
        return "w128mix"
    raise ConfigError(f"no folded profile for {spec.spec_string()}")


def fold_tables(h: TornadoHash) -> FoldedTables:
    """Pack the logical tables of ``h`` into its profile's folded layout.

    The packing mirrors the evaluation loop: an entry for input position p
    places each future contribution at the bit offset the accumulator will
    have shifted it to by the time that character is consumed, so the folded
    evaluation is equal to the reference path by construction.
    """
    spec = h.spec
    profile = folded_profile(spec)
    c, d = spec.c, spec.d
    if profile == "w64":
        n_sigma = c + d
        psi_levels: tuple[int, ...] = ()
        out_off_phase1 = 8 * (d + 1)
    else:
        n_sigma = c + d - 2
        psi_levels = (d - 1, d)
        out_off_phase1 = 8 * (d - 1) + 32
    tables: list[list[int]] = []
    for p in range(n_sigma):  # 0-based position index
        col = [0] * 256
        for a in range(256):
            v = 0
            if p < c - 1:
                # phase 1: accumulator not yet shifting
                v ^= int(h.level_tables[0][p, a])
                off = 8
                for level in range(1, d + 1):
                    if level in psi_levels:
                        if p < spec.level_input_positions(level):
                            v ^= int(h.level_tables[level][p, a]) << off
                        off += 16
                    else:
                        v ^= int(h.level_tables[level][p, a]) << off
                        off += 8
                v ^= int(h.top_table[p][a]) << out_off_phase1
            else:
                # phase 2: position p is consumed from the accumulator after
                # p - (c - 1) shifts; future level L lands at offset
                # 8*(c + L - p - 2) for 8-bit levels
                off = 0
                for level in range(p - c + 2, d + 1):
                    if level in psi_levels:
                        if p < spec.level_input_positions(level):
                            v ^= int(h.level_tables[level][p, a]) << off
                        off += 16
                    else:
                        v ^= int(h.level_tables[level][p, a]) << off
                        off += 8
                v ^= int(h.top_table[p][a]) << off
            col[a] = v
        tables.append(col)
    tables_np = None
    if profile == "w64":
        tables_np = np.array(tables, dtype=np.uint64)
        tables_np.flags.writeable = False
        return FoldedTables("w64", tables, tables_np)
    psi_tables = [[int(v) for v in h.top_table[n_sigma + k]] for k in range(2)]
    return FoldedTables("w128mix", tables, None, psi_tables)


def eval_folded(h: TornadoHash, x: int) -> int:
    """Shift/xor evaluation over the folded tables; equals ``h.eval(x)``."""
    spec = h.spec
    f = h.folded
    tabs = f.tables
    c, d = spec.c, spec.d
    acc = 0
    for i in range(c - 1):
        acc ^= tabs[i][x & 255]
        x >>= 8
    acc ^= x  # remaining low bits are the last input character
    if f.profile == "w64":
        for i in range(c - 1, c + d):
            ch = acc & 255
            acc >>= 8
            acc ^= tabs[i][ch]
        return acc
    for i in range(c - 1, c + d - 2):
        ch = acc & 255
        acc >>= 8
        acc ^= tabs[i][ch]
    b1 = acc & 0xFFFF
    acc >>= 16
    b2 = acc & 0xFFFF
    acc >>= 16
    return acc ^ f.psi_tables[0][b1] ^ f.psi_tables[1][b2]  # type: ignore[index]


def eval_folded_batch(h: TornadoHash, xs: np.ndarray) -> np.ndarray:
    """Vectorized folded evaluation (w64 profile only)."""
    f = h.folded
    if f.profile != "w64":
        raise ConfigError("batch folded evaluation only supports the w64 profile")
    tabs = f.tables_np
    assert tabs is not None
    c, d = h.spec.c, h.spec.d
    xs = np.asarray(xs, dtype=np.uint64)
    acc = np.zeros(len(xs), dtype=np.uint64)
    m8 = _U(255)
    for i in range(c - 1):
        acc ^= tabs[i][xs & m8]
        xs = xs >> _U(8)
    acc ^= xs
    for i in range(c - 1, c + d):
        ch = acc & m8
        acc >>= _U(8)
        acc ^= tabs[i][ch]
    return acc


def derived_injectivity_check(h: TornadoHash, keys) -> bool:
    """True iff the derived keys of the given distinct keys are distinct."""
    keys = np.asarray(list(keys), dtype=np.uint64)
    if len(keys) <= 1:
        return True
    chars = h.derive_batch(keys)
    return len(np.unique(chars, axis=0)) == len(keys)


def hash_select_bits(h: TornadoHash, x: int, s: int) -> int:
    return h.select_bits(x, s)


def hash_free_bits(h: TornadoHash, x: int, t: int) -> int:
    return h.free_bits(x, t)


def dump_tables(h: TornadoHash) -> str:
    """Bit-exact text dump of all logical table entries in canonical order.

    Format: header ``tornado-tables v1 <spec-string> seed=<hex>``, then one
    lowercase-hex word per entry (zero-padded to the entry's bit width),
    levels ascending / positions ascending / slots ascending, then the top
    table positions ascending / slots ascending.
    """
    spec = h.spec
    lines = [f"tornado-tables v1 {spec.spec_string()} seed={h.seed:#x}"]
    for level in spec.levels():
        width = (spec.level_output_bits(level) + 3) // 4
        tbl = h.level_tables[level]
        for j in range(spec.level_input_positions(level)):
            lines.extend(f"{int(v):0{width}x}" for v in tbl[j])
    width = (spec.out_bits + 3) // 4
    for i in range(spec.positions):
        lines.extend(f"{int(v):0{width}x}" for v in h.top_table[i])
    return "\n".join(lines) + "\n"
