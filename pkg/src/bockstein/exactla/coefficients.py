"""Ground rings: F_p, Z/p^k and the p-local integers Z_(p)."""
from dataclasses import dataclass
from fractions import Fraction


def is_prime(n):
    if n < 2:
        return False
    i = 2
    while i * i <= n:
        if n % i == 0:
            return False
        i += 1
    return True


def p_valuation(n, p):
    """Exponent of p in the nonzero integer n."""
    n = abs(n)
    v = 0
    while n % p == 0:
        n //= p
        v += 1
    return v


@dataclass(frozen=True)
class Coefficients:
    """A local ground ring with residue field F_p.

    ``kind`` is ``"field"`` (F_p), ``"prime_power"`` (Z/p^k) or ``"plocal"``
    (Z_(p)).  Elements of the modular kinds are ints in ``[0, p^k)``; p-local
    elements are ints or Fractions whose denominator is prime to p.
    """

    kind: str
    p: int
    k: int = 1

    def __post_init__(self):
        if not is_prime(self.p):
            raise ValueError(f"{self.p} is not prime")
        if self.kind not in ("field", "prime_power", "plocal"):
            raise ValueError(f"unknown coefficient kind {self.kind!r}")
        if self.k < 1:
            raise ValueError("k must be at least 1")
        if self.kind == "field" and self.k != 1:
            raise ValueError("a prime field has k = 1")

    @property
    def exponent(self):
        """K with p^K = 0, or None over Z_(p)."""
        if self.kind == "plocal":
            return None
        return self.k

    @property
    def modulus(self):
        e = self.exponent
        return None if e is None else self.p ** e

    @property
    def is_modular(self):
        return self.kind != "plocal"

    def reduce(self, x):
        if self.kind == "plocal":
            if isinstance(x, Fraction):
                if x.denominator % self.p == 0:
                    raise ValueError(f"{x} is not {self.p}-integral")
                return x.numerator if x.denominator == 1 else x
            return int(x)
        if isinstance(x, Fraction):
            if x.denominator % self.p == 0:
                raise ValueError(f"{x} is not {self.p}-integral")
            m = self.modulus
            return x.numerator * pow(x.denominator, -1, m) % m
        return int(x) % self.modulus

    def valuation(self, x):
        """p-adic valuation; the exponent cap (or None for Z_(p)) when x = 0."""
        if x == 0:
            return self.exponent
        if isinstance(x, Fraction):
            return p_valuation(x.numerator, self.p)
        return p_valuation(x, self.p)

    def is_unit(self, x):
        return x != 0 and self.valuation(x) == 0

    def inverse(self, u):
        if not self.is_unit(u):
            raise ZeroDivisionError(f"{u} is not a unit")
        if self.kind == "plocal":
            return self.reduce(1 / Fraction(u))
        return pow(int(u), -1, self.modulus)

    def divide_exact(self, a, b):
        """Some c with c*b = a, given valuation(a) >= valuation(b) and b != 0."""
        if self.kind == "plocal":
            return self.reduce(Fraction(a) / Fraction(b))
        vb = self.valuation(b)
        pv = self.p ** vb
        u = b // pv
        return (a // pv) * pow(u, -1, self.modulus) % self.modulus

    def order_exponent(self, d):
        """Exponent e with R/(d) = Z/p^e; None means a free summand."""
        if d == 0:
            return self.exponent
        return self.valuation(d)

    def describe(self):
        if self.kind == "field":
            return f"F_{self.p}"
        if self.kind == "prime_power":
            return f"Z/{self.p}^{self.k}"
        return f"Z_({self.p})"

    def as_prime_power(self, k):
        return Coefficients("field" if k == 1 else "prime_power", self.p, k)


def PrimeField(p):
    return Coefficients("field", p)


def PrimePowerRing(p, k):
    return Coefficients("field" if k == 1 else "prime_power", p, k)


def PLocalIntegers(p):
    return Coefficients("plocal", p)
