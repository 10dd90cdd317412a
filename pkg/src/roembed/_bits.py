"""Bit-parallel helpers shared by the evaluators and verifiers.

Truth tables over k inputs are packed into a single Python int with one bit
per assignment, so an AND/OR tree evaluates over the whole input space with
one ``&``/``|`` per gate.
"""

from __future__ import annotations


def periodic_mask(total_bits: int, period: int, ones_offset: int, ones_width: int) -> int:
    """Int with bit i set iff ``ones_offset <= i % period < ones_offset + ones_width``.

    Built by doubling, so cost is logarithmic in ``total_bits``.
    """
    block = ((1 << ones_width) - 1) << ones_offset
    mask = block
    span = period
    while span < total_bits:
        mask |= mask << span
        span <<= 1
    return mask & ((1 << total_bits) - 1)


def variable_mask(total_bits: int, bit_index: int) -> int:
    """Mask over assignment indices where the variable at ``bit_index`` is 1.

    Assignment ``a`` maps to bit ``a`` of the mask; the variable reads bit
    ``bit_index`` of ``a`` (LSB is index 0).
    """
    half = 1 << bit_index
    return periodic_mask(total_bits, half << 1, half, half)


def lowest_set_bit(value: int) -> int:
    """Index of the least significant set bit (value must be nonzero)."""
    return (value & -value).bit_length() - 1


def bitstring(value: int, width: int) -> str:
    """Fixed-width binary rendering, most significant bit first."""
    return format(value, f"0{width}b")
