import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cvclone import privacy
from cvclone.privacy import HashSpec, budget, compress


def dense_toeplitz(seed, n_in, n_out):
    """Build T[i, j] = seed[i - j + n_in - 1] with explicit loops."""
    t = np.zeros((n_out, n_in), dtype=np.uint8)
    for i in range(n_out):
        for j in range(n_in):
            t[i, j] = seed[i - j + n_in - 1]
    return t


class TestHash:
    @pytest.mark.parametrize("n_in,n_out", [(1, 1), (7, 3), (64, 16), (1000, 333)])
    def test_matches_dense_product(self, n_in, n_out):
        spec = HashSpec.random(n_in, n_out, n_in)
        x = np.random.default_rng(n_out).integers(0, 2, n_in, dtype=np.uint8)
        t = dense_toeplitz(spec.seed_bits, n_in, n_out)
        assert np.array_equal(spec.matrix(), t)
        assert np.array_equal(compress(x, spec), (t.astype(int) @ x) % 2)

    def test_large_input_exact(self):
        n_in, n_out = 200_000, 150_000
        spec = HashSpec.random(n_in, n_out, 1)
        x = np.random.default_rng(2).integers(0, 2, n_in, dtype=np.uint8)
        out = compress(x, spec)
        rows = np.random.default_rng(3).choice(n_out, 20, replace=False)
        for i in rows:
            seg = spec.seed_bits[i : i + n_in][::-1]
            assert out[i] == int(seg.astype(np.int64) @ x) & 1

    def test_seed_selecting_diagonal_copies_input(self):
        # Only seed[n_in - 1] set: T is the identity on the first n_out bits.
        n_in, n_out = 12, 5
        s = np.zeros(n_in + n_out - 1, dtype=np.uint8)
        s[n_in - 1] = 1
        x = np.random.default_rng(0).integers(0, 2, n_in, dtype=np.uint8)
        assert np.array_equal(compress(x, HashSpec(n_in, n_out, s)), x[:n_out])

    def test_zero_output(self):
        spec = HashSpec(10, 0, np.zeros(0, dtype=np.uint8))
        assert compress(np.ones(10, dtype=np.uint8), spec).size == 0
        assert HashSpec.random(10, 0, 1).seed_bits.size == 0

    def test_validation(self):
        with pytest.raises(ValueError):
            HashSpec(4, 5, np.zeros(8))
        with pytest.raises(ValueError):
            HashSpec(4, 2, np.zeros(4))
        with pytest.raises(ValueError):
            compress([0, 1, 2], HashSpec.random(3, 1, 0))
        with pytest.raises(ValueError):
            compress([0, 1], HashSpec.random(3, 1, 0))

    def test_deterministic(self):
        x = np.random.default_rng(5).integers(0, 2, 300, dtype=np.uint8)
        assert np.array_equal(compress(x, HashSpec.random(300, 100, 9)), compress(x, HashSpec.random(300, 100, 9)))

    @settings(deadline=None, max_examples=100)
    @given(st.data())
    def test_linear(self, data):
        n_in = data.draw(st.integers(1, 80))
        n_out = data.draw(st.integers(0, n_in))
        bits = st.lists(st.integers(0, 1), min_size=n_in, max_size=n_in)
        x, y = np.array(data.draw(bits)), np.array(data.draw(bits))
        spec = HashSpec.random(n_in, n_out, data.draw(st.integers(0, 2**31)))
        assert np.array_equal(compress(x ^ y, spec), compress(x, spec) ^ compress(y, spec))


class TestUniversality:
    def test_exhaustive_small(self):
        # Over all seeds, a nonzero difference hashes to zero exactly 2^-n_out of the time.
        n_in, n_out = 6, 3
        seeds = np.array(list(itertools.product((0, 1), repeat=n_in + n_out - 1)), dtype=np.uint8)
        for d in itertools.product((0, 1), repeat=n_in):
            d = np.array(d, dtype=np.uint8)
            if not d.any():
                continue
            zero = sum(not compress(d, HashSpec(n_in, n_out, s)).any() for s in seeds)
            assert zero * 2**n_out == len(seeds)

    def test_monte_carlo_collision_rate(self):
        rng = np.random.default_rng(11)
        x = rng.integers(0, 2, 40, dtype=np.uint8)
        y = x.copy()
        y[[3, 17]] ^= 1
        n = 200_000
        rate = privacy.collision_rate(x, y, 4, n, 1)
        assert abs(rate - 1 / 16) < 4 * np.sqrt(1 / 16 * 15 / 16 / n)

    def test_collision_rate_agrees_with_compress(self):
        x = np.zeros(10, dtype=np.uint8)
        y = x.copy()
        y[9] = 1
        # The last column of T is seed[0 .. n_out-1]; all zero with probability 2^-n_out.
        assert privacy.collision_rate(x, y, 2, 50_000, 3) == pytest.approx(0.25, abs=0.01)
        with pytest.raises(ValueError):
            privacy.collision_rate(x, x, 2, 10, 0)


class TestBudget:
    def test_worked_example(self):
        b = budget(100_000, 1.8, 0.0, 0, 100)
        assert b.n_out == 179_900
        assert b.rate == pytest.approx(1.799)

    def test_equal_information_has_no_secrecy(self):
        b = budget(100_000, 1.0, 1.0)
        assert b.n_out == 0 and b.no_secrecy

    def test_bound_from_total(self):
        b = budget(1000, 1.5, i_total=2.0)
        assert b.i_e == pytest.approx(0.5)
        assert b.n_out == 1000 - 100
        assert budget(1000, 0.9, i_total=2.0).no_secrecy

    def test_leak_excess_and_floor(self):
        assert budget(1000, 1.0, 0.2, leak_excess=10.2, security=50).n_out == 800 - 11 - 50
        assert budget(100, 1.0, 0.5, security=100).n_out == 0

    def test_no_attack_rate_approaches_net_information(self):
        # I_E = 0: rate -> I_B - leak_excess/l as l grows.
        l = 10**7
        assert budget(l, 2.0, 0.0, leak_excess=0.17 * l).rate == pytest.approx(1.83, abs=1e-4)

    def test_validation(self):
        with pytest.raises(ValueError):
            budget(10, 1.0)
        with pytest.raises(ValueError):
            budget(10, 2.5, 0.1, i_total=2.0)
        with pytest.raises(ValueError):
            budget(-1, 1.0, 0.0)


class TestBitFiles:
    @pytest.mark.parametrize("n", [0, 1, 7, 8, 9, 1000])
    def test_round_trip(self, n, tmp_path):
        bits = np.random.default_rng(n).integers(0, 2, n, dtype=np.uint8)
        path = tmp_path / "b.bin"
        privacy.write_bits(path, bits)
        assert path.stat().st_size == 8 + (n + 7) // 8
        assert np.array_equal(privacy.read_bits(path), bits)

    def test_layout(self):
        data = privacy.pack_bits([1, 0, 0, 0, 0, 0, 0, 0, 1, 1])
        assert data[:8] == (10).to_bytes(8, "little")
        assert data[8:] == bytes([0b00000001, 0b00000011])

    def test_corrupt(self):
        with pytest.raises(ValueError):
            privacy.unpack_bits(b"\x01")
        with pytest.raises(ValueError):
            privacy.unpack_bits((20).to_bytes(8, "little") + b"\x00")
