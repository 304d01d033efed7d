import pytest

from dsntt.params import find_ntt_prime


def trial_division_prime(x):
    if x < 2:
        return False
    f = 2
    while f * f <= x:
        if x % f == 0:
            return False
        f += 1
    return True


def ext_euclid_inverse(a, m):
    old_r, r, old_s, s = a, m, 1, 0
    while r:
        k = old_r // r
        old_r, r = r, old_r - k * r
        old_s, s = s, old_s - k * s
    assert old_r == 1
    return old_s % m


@pytest.fixture(scope="session")
def primes():
    """One NTT-friendly prime per width class, all supporting n up to 1024."""
    return {
        "small": find_ntt_prime(17, 1024),
        "64": find_ntt_prime(64, 1024),
        "256": find_ntt_prime(253, 1024),
    }
