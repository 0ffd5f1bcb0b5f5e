"""Byte-oriented integer range coder.

64-bit low / 32-bit range registers with 16-bit frequency precision.  Carries
are absorbed into a pending-byte cache, so emitted bytes are never rewritten;
everything after table construction is integer arithmetic, which makes the
byte stream platform-independent.
"""

from __future__ import annotations

from bisect import bisect_right

from ..errors import CorruptionError, TruncationError

_TOP = 1 << 24
_MASK32 = 0xFFFFFFFF
_TOTAL = 1 << 16


class RangeEncoder:
    __slots__ = ("_low", "_range", "_cache", "_cache_size", "_out", "_finished")

    def __init__(self):
        self._low = 0  # 33-bit accumulator; bit 32 is the pending carry
        self._range = _MASK32
        self._cache = 0
        self._cache_size = 1
        self._out = bytearray()
        self._finished = False

    def encode(self, cum_lo: int, cum_hi: int) -> None:
        """Narrow the interval to [cum_lo, cum_hi) in 1/65536 units."""
        if self._finished:
            raise CorruptionError("encoder already finished")
        r = self._range >> 16
        self._low += r * cum_lo
        if cum_hi == _TOTAL:
            self._range -= r * cum_lo  # top symbol absorbs the rounding slack
        else:
            self._range = r * (cum_hi - cum_lo)
        while self._range < _TOP:
            self._range = (self._range << 8) & _MASK32
            self._shift_low()

    def _shift_low(self) -> None:
        low = self._low
        if low < 0xFF000000 or low > _MASK32:
            carry = low >> 32
            out = self._out
            out.append((self._cache + carry) & 0xFF)
            filler = (0xFF + carry) & 0xFF
            for _ in range(self._cache_size - 1):
                out.append(filler)
            self._cache = (low >> 24) & 0xFF
            self._cache_size = 0
        self._cache_size += 1
        self._low = (low << 8) & _MASK32

    def finish(self) -> bytes:
        if not self._finished:
            for _ in range(5):
                self._shift_low()
            self._finished = True
        return bytes(self._out)


class RangeDecoder:
    __slots__ = ("_data", "_pos", "_range", "_code")

    def __init__(self, data: bytes):
        self._data = data
        self._pos = 0
        self._range = _MASK32
        self._code = 0
        self._next_byte()  # encoder's initial null cache byte
        for _ in range(4):
            self._code = (self._code << 8) | self._next_byte()

    def _next_byte(self) -> int:
        if self._pos >= len(self._data):
            raise TruncationError("range-coded payload ended prematurely")
        b = self._data[self._pos]
        self._pos += 1
        return b

    def decode(self, cum: list[int]) -> int:
        """Decode one symbol given its channel's cumulative table [0..65536]."""
        r = self._range >> 16
        v = self._code // r
        if v >= _TOTAL:
            v = _TOTAL - 1
        sym = bisect_right(cum, v) - 1
        lo, hi = cum[sym], cum[sym + 1]
        self._code -= r * lo
        if hi == _TOTAL:
            self._range -= r * lo
        else:
            self._range = r * (hi - lo)
        if self._code < 0:
            raise CorruptionError("range decoder state underflow")
        while self._range < _TOP:
            self._range = (self._range << 8) & _MASK32
            self._code = ((self._code << 8) | self._next_byte()) & _MASK32
        return sym

    @property
    def consumed(self) -> int:
        return self._pos
