import random

import numpy as np
import pytest

from rackcoop import field
from rackcoop.field import FieldError, FieldSpec, from_spec, gf256, gf65536, prime_field


# ---------------------------------------------------------------------------
# identities and hand values
# ---------------------------------------------------------------------------

def test_characteristic_two_self_inverse_exhaustive():
    f = gf256()
    for a in range(256):
        assert f.add(a, a) == 0


def test_additive_identity():
    f = gf256()
    for a in range(0, 256, 7):
        assert f.add(a, 0) == a
    p = prime_field(11)
    for a in range(11):
        assert p.add(a, 0) == a


def test_prime_modular_add():
    assert prime_field(7).add(5, 4) == 2


def test_multiplicative_identities():
    for f in (gf256(), prime_field(7)):
        assert f.inv(1) == 1
        for a in range(1, min(64, f.order)):
            assert f.mul(a, 1) == a


def test_gf256_all_inverses():
    """Every nonzero element times its inverse is 1, exhaustively."""
    f = gf256()
    for x in range(1, 256):
        assert f.mul(x, f.inv(x)) == 1
    with pytest.raises(ZeroDivisionError):
        f.inv(0)


def test_prime_all_inverses():
    for q in (2, 7, 31):
        f = prime_field(q)
        for x in range(1, q):
            assert f.mul(x, f.inv(x)) == 1
        with pytest.raises(ZeroDivisionError):
            f.inv(0)


# ---------------------------------------------------------------------------
# field axioms
# ---------------------------------------------------------------------------

def test_gf256_axioms_exhaustive():
    """Commutativity pairwise, associativity/distributivity over the full cube
    (vectorized in 256 slabs)."""
    f = gf256()
    vals = np.arange(256)
    B, C = np.meshgrid(vals, vals, indexing="ij")
    assert np.array_equal(f.vec_mul(B, C), f.vec_mul(C, B))
    assert np.array_equal(f.vec_add(B, C), f.vec_add(C, B))
    for a in range(256):
        assert np.array_equal(f.vec_mul(f.vec_mul(a, B), C), f.vec_mul(a, f.vec_mul(B, C)))
        left = f.vec_mul(a, f.vec_add(B, C))
        right = f.vec_add(f.vec_mul(a, B), f.vec_mul(a, C))
        assert np.array_equal(left, right)


def test_small_prime_axioms_exhaustive():
    f = prime_field(7)
    for a in range(7):
        for b in range(7):
            assert f.add(a, b) == f.add(b, a)
            assert f.mul(a, b) == f.mul(b, a)
            for c in range(7):
                assert f.mul(a, f.mul(b, c)) == f.mul(f.mul(a, b), c)
                assert f.mul(a, f.add(b, c)) == f.add(f.mul(a, b), f.mul(a, c))


def test_gf65536_axioms_sampled():
    f = gf65536()
    rng = np.random.default_rng(123)
    a, b, c = (rng.integers(0, f.order, size=20000) for _ in range(3))
    assert np.array_equal(f.vec_mul(f.vec_mul(a, b), c), f.vec_mul(a, f.vec_mul(b, c)))
    left = f.vec_mul(a, f.vec_add(b, c))
    right = f.vec_add(f.vec_mul(a, b), f.vec_mul(a, c))
    assert np.array_equal(left, right)
    for x in rng.integers(1, f.order, size=200):
        assert f.mul(int(x), f.inv(int(x))) == 1


def test_pow_matches_repeated_mul():
    rng = random.Random(4)
    for f in (gf256(), gf65536(), prime_field(101)):
        for _ in range(20):
            a = rng.randrange(f.order)
            acc = 1
            for n in range(6):
                assert f.pow(a, n) == acc
                acc = f.mul(acc, a)
        assert f.pow(0, 0) == 1


# ---------------------------------------------------------------------------
# serialization and validation
# ---------------------------------------------------------------------------

def test_serialization_roundtrip_exhaustive():
    f8 = gf256()
    vals = list(range(256))
    assert f8.from_bytes(f8.to_bytes(vals)).tolist() == vals
    f16 = gf65536()
    vals = list(range(65536))
    assert f16.from_bytes(f16.to_bytes(vals)).tolist() == vals
    fp = prime_field(257)
    vals = list(range(257))
    assert fp.from_bytes(fp.to_bytes(vals)).tolist() == vals


def test_symbol_widths():
    assert gf256().symbol_bytes == 1
    assert gf65536().symbol_bytes == 2
    assert gf256().to_bytes([0x11]) == b"\x11"
    # little-endian two-byte encoding
    assert gf65536().to_bytes([0x1234]) == b"\x34\x12"


def test_canonical_moduli():
    assert gf256().modulus == 0x11D
    assert gf65536().modulus == 0x1100B


def test_out_of_range_rejected():
    f = gf256()
    with pytest.raises(FieldError):
        f.add(256, 0)
    with pytest.raises(FieldError):
        f.mul(-1, 3)
    with pytest.raises(FieldError):
        f.to_bytes([999])


def test_bad_field_specs():
    with pytest.raises(FieldError):
        prime_field(10)
    with pytest.raises(FieldError):
        field.BinaryField(8, modulus=0x1D)  # degree too low
    with pytest.raises(FieldError):
        from_spec(FieldSpec("binary-extension", 256, 0x11B))  # non-canonical
    with pytest.raises(FieldError):
        FieldSpec("weird", 7, 7)


def test_from_spec_roundtrip():
    for f in (gf256(), gf65536(), prime_field(97)):
        assert from_spec(f.spec) == f
