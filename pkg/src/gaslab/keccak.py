"""Keccak-256 for trie node hashing.

Pure-Python sponge over Keccak-f[1600]. Both the original Keccak padding
(0x01, used by Ethereum) and the NIST SHA3 padding (0x06) are exposed; the
two share everything but the domain byte, which lets the test suite verify
the permutation against hashlib's sha3_256.

The hot permutation is unrolled over 25 locals; `_keccak_f1600_reference`
keeps the readable table-driven form and must stay bit-identical to it.
"""

from __future__ import annotations

M = (1 << 64) - 1

_ROUND_CONSTANTS = (
    0x0000000000000001, 0x0000000000008082, 0x800000000000808A,
    0x8000000080008000, 0x000000000000808B, 0x0000000080000001,
    0x8000000080008081, 0x8000000000008009, 0x000000000000008A,
    0x0000000000000088, 0x0000000080008009, 0x000000008000000A,
    0x000000008000808B, 0x800000000000008B, 0x8000000000008089,
    0x8000000000008003, 0x8000000000008002, 0x8000000000000080,
    0x000000000000800A, 0x800000008000000A, 0x8000000080008081,
    0x8000000000008080, 0x0000000080000001, 0x8000000080008008,
)

# Lane walk order and rotation amounts for the combined rho/pi step.
_PI_LANES = (10, 7, 11, 17, 18, 3, 5, 16, 8, 21, 24, 4,
             15, 23, 19, 13, 12, 2, 20, 14, 22, 9, 6, 1)
_ROTATIONS = (1, 3, 6, 10, 15, 21, 28, 36, 45, 55, 2, 14,
              27, 41, 56, 8, 25, 43, 62, 18, 39, 61, 20, 44)

_RATE_BYTES = 136  # 1088-bit rate for 256-bit output


def _keccak_f1600(st: list[int]) -> None:
    """24-round Keccak-f[1600], unrolled over locals for speed."""
    (a0, a1, a2, a3, a4, a5, a6, a7, a8, a9, a10, a11, a12,
     a13, a14, a15, a16, a17, a18, a19, a20, a21, a22, a23, a24) = st
    for rc in _ROUND_CONSTANTS:
        c0 = a0 ^ a5 ^ a10 ^ a15 ^ a20
        c1 = a1 ^ a6 ^ a11 ^ a16 ^ a21
        c2 = a2 ^ a7 ^ a12 ^ a17 ^ a22
        c3 = a3 ^ a8 ^ a13 ^ a18 ^ a23
        c4 = a4 ^ a9 ^ a14 ^ a19 ^ a24
        d = c4 ^ (((c1 << 1) | (c1 >> 63)) & M)
        a0 ^= d
        a5 ^= d
        a10 ^= d
        a15 ^= d
        a20 ^= d
        d = c0 ^ (((c2 << 1) | (c2 >> 63)) & M)
        a1 ^= d
        a6 ^= d
        a11 ^= d
        a16 ^= d
        a21 ^= d
        d = c1 ^ (((c3 << 1) | (c3 >> 63)) & M)
        a2 ^= d
        a7 ^= d
        a12 ^= d
        a17 ^= d
        a22 ^= d
        d = c2 ^ (((c4 << 1) | (c4 >> 63)) & M)
        a3 ^= d
        a8 ^= d
        a13 ^= d
        a18 ^= d
        a23 ^= d
        d = c3 ^ (((c0 << 1) | (c0 >> 63)) & M)
        a4 ^= d
        a9 ^= d
        a14 ^= d
        a19 ^= d
        a24 ^= d
        b0 = a0
        b1 = ((a6 << 44) | (a6 >> 20)) & M
        b2 = ((a12 << 43) | (a12 >> 21)) & M
        b3 = ((a18 << 21) | (a18 >> 43)) & M
        b4 = ((a24 << 14) | (a24 >> 50)) & M
        b5 = ((a3 << 28) | (a3 >> 36)) & M
        b6 = ((a9 << 20) | (a9 >> 44)) & M
        b7 = ((a10 << 3) | (a10 >> 61)) & M
        b8 = ((a16 << 45) | (a16 >> 19)) & M
        b9 = ((a22 << 61) | (a22 >> 3)) & M
        b10 = ((a1 << 1) | (a1 >> 63)) & M
        b11 = ((a7 << 6) | (a7 >> 58)) & M
        b12 = ((a13 << 25) | (a13 >> 39)) & M
        b13 = ((a19 << 8) | (a19 >> 56)) & M
        b14 = ((a20 << 18) | (a20 >> 46)) & M
        b15 = ((a4 << 27) | (a4 >> 37)) & M
        b16 = ((a5 << 36) | (a5 >> 28)) & M
        b17 = ((a11 << 10) | (a11 >> 54)) & M
        b18 = ((a17 << 15) | (a17 >> 49)) & M
        b19 = ((a23 << 56) | (a23 >> 8)) & M
        b20 = ((a2 << 62) | (a2 >> 2)) & M
        b21 = ((a8 << 55) | (a8 >> 9)) & M
        b22 = ((a14 << 39) | (a14 >> 25)) & M
        b23 = ((a15 << 41) | (a15 >> 23)) & M
        b24 = ((a21 << 2) | (a21 >> 62)) & M
        a0 = b0 ^ (~b1 & b2)
        a1 = b1 ^ (~b2 & b3)
        a2 = b2 ^ (~b3 & b4)
        a3 = b3 ^ (~b4 & b0)
        a4 = b4 ^ (~b0 & b1)
        a5 = b5 ^ (~b6 & b7)
        a6 = b6 ^ (~b7 & b8)
        a7 = b7 ^ (~b8 & b9)
        a8 = b8 ^ (~b9 & b5)
        a9 = b9 ^ (~b5 & b6)
        a10 = b10 ^ (~b11 & b12)
        a11 = b11 ^ (~b12 & b13)
        a12 = b12 ^ (~b13 & b14)
        a13 = b13 ^ (~b14 & b10)
        a14 = b14 ^ (~b10 & b11)
        a15 = b15 ^ (~b16 & b17)
        a16 = b16 ^ (~b17 & b18)
        a17 = b17 ^ (~b18 & b19)
        a18 = b18 ^ (~b19 & b15)
        a19 = b19 ^ (~b15 & b16)
        a20 = b20 ^ (~b21 & b22)
        a21 = b21 ^ (~b22 & b23)
        a22 = b22 ^ (~b23 & b24)
        a23 = b23 ^ (~b24 & b20)
        a24 = b24 ^ (~b20 & b21)
        a0 ^= rc
    st[:] = (a0, a1, a2, a3, a4, a5, a6, a7, a8, a9, a10, a11, a12,
             a13, a14, a15, a16, a17, a18, a19, a20, a21, a22, a23, a24)

def _keccak_f1600_reference(st: list[int]) -> None:
    """Table-driven permutation; the readable twin of `_keccak_f1600`."""
    for rc in _ROUND_CONSTANTS:
        # theta
        c = [st[x] ^ st[x + 5] ^ st[x + 10] ^ st[x + 15] ^ st[x + 20]
             for x in range(5)]
        for x in range(5):
            cx = c[(x + 1) % 5]
            d = c[(x + 4) % 5] ^ (((cx << 1) | (cx >> 63)) & M)
            for y in range(0, 25, 5):
                st[x + y] ^= d

        # rho + pi
        t = st[1]
        for lane, rot in zip(_PI_LANES, _ROTATIONS):
            t, st[lane] = st[lane], ((t << rot) | (t >> (64 - rot))) & M

        # chi
        for j in (0, 5, 10, 15, 20):
            row = st[j:j + 5]
            for i in range(5):
                st[j + i] = row[i] ^ (~row[(i + 1) % 5] & row[(i + 2) % 5])

        # iota
        st[0] ^= rc


def _sponge_256(data: bytes, domain: int) -> bytes:
    """Absorb data with the given domain padding byte, squeeze 32 bytes."""
    padded = bytearray(data)
    pad_len = _RATE_BYTES - (len(padded) % _RATE_BYTES)
    padded += b"\x00" * pad_len
    padded[len(data)] ^= domain
    padded[-1] ^= 0x80

    st = [0] * 25
    for block_start in range(0, len(padded), _RATE_BYTES):
        block = padded[block_start:block_start + _RATE_BYTES]
        for i in range(17):
            st[i] ^= int.from_bytes(block[i * 8:i * 8 + 8], "little")
        _keccak_f1600(st)

    return b"".join(st[i].to_bytes(8, "little") for i in range(4))


def keccak_256(data: bytes) -> bytes:
    """32-byte Keccak-256 digest (original padding, as used by Ethereum)."""
    return _sponge_256(data, 0x01)


def sha3_256(data: bytes) -> bytes:
    """32-byte NIST SHA3-256 digest; same permutation, 0x06 domain byte."""
    return _sponge_256(data, 0x06)
