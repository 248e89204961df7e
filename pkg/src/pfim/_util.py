"""Small shared helpers: reproducible seed derivation and number formatting.

Everything downstream (samplers, policies, the CLI) must be bit-reproducible
across processes, so seed derivation goes through blake2b rather than the
built-in hash(), which is salted per interpreter run.
"""

import hashlib


def derive_seed(base: int, *parts) -> int:
    """Derive a 63-bit child seed from a base seed and a label path.

    Same (base, parts) always yields the same child, and distinct labels
    yield independent streams for all practical purposes.
    """
    h = hashlib.blake2b(digest_size=8)
    h.update(str(int(base)).encode())
    for part in parts:
        h.update(b"\x1f")
        if isinstance(part, bytes):
            h.update(part)
        else:
            h.update(str(part).encode())
    return int.from_bytes(h.digest(), "big") >> 1


def fmt_g(x: float, digits: int = 9) -> str:
    """Render a float with a fixed number of significant digits.

    Used for CSV cells and transcripts; output is locale-independent
    ('.' decimal separator) so identical runs emit identical bytes.
    """
    return format(float(x), f".{digits}g")
