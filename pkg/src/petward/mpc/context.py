"""Field context, authenticated shares, and the trusted dealer.

The dealer knows the global MAC key alpha = sum(alpha_i) and hands each
party its key share; the online protocol never reconstructs alpha. A
sharing of x is n uniform value shares summing to x plus MAC shares
summing to alpha * x, so any n-1 shares are jointly uniform and carry
nothing about x.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field

from petward import PetwardError
from petward.numutil import centered, is_prime

DEFAULT_FIELD_PRIME = (1 << 61) - 1  # Mersenne prime
FIXED_POINT_SCALE = 1000  # reals enter the field as round(x * 1000)


class MpcParameterError(PetwardError):
    pass


class MpcRangeError(PetwardError):
    pass


class ProtocolError(PetwardError):
    pass


class MacCheckError(PetwardError):
    """An opening failed authentication; identifies the batch, never a party."""


class TripleReuseError(PetwardError):
    pass


class OfflineExhaustedError(PetwardError):
    pass


@dataclass(frozen=True)
class AuthShare:
    party: int
    value: int
    mac: int


@dataclass
class BeaverTriple:
    a: list[AuthShare]
    b: list[AuthShare]
    c: list[AuthShare]  # sharing of a*b
    consumed: bool = False

    def consume(self) -> None:
        if self.consumed:
            raise TripleReuseError("beaver triple already consumed; triples are single-use")
        self.consumed = True


@dataclass(frozen=True)
class MpcContext:
    n: int
    p: int
    alpha_shares: tuple[int, ...]  # dealer-side; party i sees only index i

    @property
    def alpha(self) -> int:
        """Dealer bookkeeping only; the protocol never opens this."""
        return sum(self.alpha_shares) % self.p


def dealer_setup(n: int, p: int = DEFAULT_FIELD_PRIME, seed: int = 0) -> MpcContext:
    if n < 2:
        raise MpcParameterError(f"need at least 2 parties, got {n}")
    if not is_prime(p):
        raise MpcParameterError(f"field modulus {p} is not prime")
    rng = random.Random(seed)
    return MpcContext(n=n, p=p, alpha_shares=tuple(rng.randrange(p) for _ in range(n)))


def _additive_sharing(total: int, n: int, p: int, rng: random.Random) -> list[int]:
    shares = [rng.randrange(p) for _ in range(n - 1)]
    shares.append((total - sum(shares)) % p)
    return shares


def share_input(ctx: MpcContext, x: int, rng: random.Random) -> list[AuthShare]:
    if not 0 <= x < ctx.p:
        raise MpcRangeError(f"input {x} outside field [0, {ctx.p})")
    values = _additive_sharing(x, ctx.n, ctx.p, rng)
    macs = _additive_sharing(ctx.alpha * x % ctx.p, ctx.n, ctx.p, rng)
    return [AuthShare(i, values[i], macs[i]) for i in range(ctx.n)]


def make_triple(ctx: MpcContext, rng: random.Random) -> BeaverTriple:
    a = rng.randrange(ctx.p)
    b = rng.randrange(ctx.p)
    return BeaverTriple(
        a=share_input(ctx, a, rng),
        b=share_input(ctx, b, rng),
        c=share_input(ctx, a * b % ctx.p, rng),
    )


@dataclass
class TriplePool:
    """Dealer-precomputed triples; draining it is an offline-phase error."""

    triples: list[BeaverTriple] = field(default_factory=list)

    def draw(self) -> BeaverTriple:
        if not self.triples:
            raise OfflineExhaustedError("no beaver triples left; rerun the offline phase")
        return self.triples.pop()

    def __len__(self) -> int:
        return len(self.triples)


def fill_pool(ctx: MpcContext, count: int, rng: random.Random) -> TriplePool:
    return TriplePool([make_triple(ctx, rng) for _ in range(count)])


def add_shares(ctx: MpcContext, a: AuthShare, b: AuthShare) -> AuthShare:
    """Local addition; linear in both the value and the MAC."""
    if a.party != b.party:
        raise ProtocolError(f"cannot add shares of parties {a.party} and {b.party}")
    return AuthShare(a.party, (a.value + b.value) % ctx.p, (a.mac + b.mac) % ctx.p)


def sub_shares(ctx: MpcContext, a: AuthShare, b: AuthShare) -> AuthShare:
    if a.party != b.party:
        raise ProtocolError(f"cannot subtract shares of parties {a.party} and {b.party}")
    return AuthShare(a.party, (a.value - b.value) % ctx.p, (a.mac - b.mac) % ctx.p)


def add_share_vectors(ctx: MpcContext, a: list[AuthShare], b: list[AuthShare]) -> list[AuthShare]:
    if len(a) != len(b) or len(a) != ctx.n:
        raise ProtocolError("share vectors must cover every party exactly once")
    return [add_shares(ctx, x, y) for x, y in zip(a, b)]


def add_public(ctx: MpcContext, shares: list[AuthShare], constant: int) -> list[AuthShare]:
    """Add a public constant: party 0 shifts its value share, every party
    shifts its MAC share by alpha_i * constant."""
    out = []
    for share in shares:
        value = (share.value + constant) % ctx.p if share.party == 0 else share.value
        mac = (share.mac + ctx.alpha_shares[share.party] * constant) % ctx.p
        out.append(AuthShare(share.party, value, mac))
    return out


def mul_public(ctx: MpcContext, shares: list[AuthShare], constant: int) -> list[AuthShare]:
    return [
        AuthShare(s.party, s.value * constant % ctx.p, s.mac * constant % ctx.p)
        for s in shares
    ]


def beaver_combine(
    ctx: MpcContext,
    triple: BeaverTriple,
    d: int,
    e: int,
) -> list[AuthShare]:
    """Per-party combine after opening d = x - a and e = y - b:
    z = c + d*b + e*a + d*e."""
    with_products = [
        AuthShare(
            i,
            (triple.c[i].value + d * triple.b[i].value + e * triple.a[i].value) % ctx.p,
            (triple.c[i].mac + d * triple.b[i].mac + e * triple.a[i].mac) % ctx.p,
        )
        for i in range(ctx.n)
    ]
    return add_public(ctx, with_products, d * e % ctx.p)


def encode_fixed(x: float, p: int = DEFAULT_FIELD_PRIME, scale: int = FIXED_POINT_SCALE) -> int:
    """Map a real to the field at the documented fixed-point scale."""
    units = round(x * scale)
    if abs(units) >= p // 2:
        raise MpcRangeError(f"value {x} overflows the fixed-point range at scale {scale}")
    return units % p


def decode_fixed(v: int, p: int = DEFAULT_FIELD_PRIME, scale: int = FIXED_POINT_SCALE) -> float:
    return centered(v, p) / scale
