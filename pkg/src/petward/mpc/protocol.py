"""The online phase: openings, Beaver multiplication, and the MAC check.

Parties are simulated state holders; every cross-party value is routed
over the session bus in explicit rounds. Openings are optimistic
(partial opens) and accumulate in a pending batch; the batch is settled
by a commit-then-reveal check of sigma_i = sum_j r_j (mac_ji - alpha_i v_j)
under public random coefficients r_j, which aborts on any tamper except
with probability 1/p.
"""

from __future__ import annotations

import hashlib
import random
from dataclasses import dataclass, field

from petward.mpc.bus import BROADCAST, DEALER, MessageBus
from petward.mpc.context import (
    AuthShare,
    BeaverTriple,
    MacCheckError,
    MpcContext,
    ProtocolError,
    beaver_combine,
    share_input,
    sub_shares,
)


@dataclass
class _PartyState:
    index: int
    alpha_share: int
    pending: list[tuple[int, int]] = field(default_factory=list)  # (opened value, own mac share)


class MpcSession:
    """One protocol run over an in-process bus."""

    def __init__(self, ctx: MpcContext, rng: random.Random):
        self.ctx = ctx
        self.rng = rng
        self.bus = MessageBus()
        self._parties = [_PartyState(i, ctx.alpha_shares[i]) for i in range(ctx.n)]
        self._pending_values: list[int] = []

    # ---- offline-phase distribution -------------------------------------

    def distribute_input(self, x: int) -> list[AuthShare]:
        """Dealer-assisted input sharing, recorded on the bus."""
        shares = share_input(self.ctx, x, self.rng)
        self.bus.next_round()
        for share in shares:
            self.bus.send(
                DEALER,
                f"party-{share.party}",
                "input-share",
                f"{share.value}:{share.mac}".encode(),
            )
        return shares

    # ---- openings --------------------------------------------------------

    def partial_open(self, shares: list[AuthShare]) -> int:
        """Broadcast value shares and sum; the MAC stays pending until the
        next check."""
        if len(shares) != self.ctx.n:
            raise ProtocolError("opening requires one share from every party")
        self.bus.next_round()
        for share in shares:
            self.bus.send(f"party-{share.party}", BROADCAST, "open-value", str(share.value).encode())
        value = sum(s.value for s in shares) % self.ctx.p
        for share in shares:
            self._parties[share.party].pending.append((value, share.mac))
        self._pending_values.append(value)
        return value

    def open_and_check(self, shares: list[AuthShare]) -> int:
        """Open with an immediate batched MAC check over every pending
        opening of this session (commit-then-reveal)."""
        value = self.partial_open(shares)
        self.check_pending()
        return value

    def check_pending(self) -> None:
        if not self._pending_values:
            return
        batch = len(self._pending_values)
        coefficients = [self.rng.randrange(self.ctx.p) for _ in range(batch)]
        self.bus.next_round()
        self.bus.send(DEALER, BROADCAST, "check-coefficients", repr(coefficients).encode())

        sigmas = []
        commits = []
        nonces = []
        for party in self._parties:
            if len(party.pending) != batch:
                raise ProtocolError("a party missed an opening; cannot run the MAC check")
            sigma = 0
            for coeff, (value, mac) in zip(coefficients, party.pending):
                sigma += coeff * (mac - party.alpha_share * value)
            sigmas.append(sigma % self.ctx.p)
            nonces.append(self.rng.randrange(1 << 64))

        self.bus.next_round()
        for party, sigma, nonce in zip(self._parties, sigmas, nonces):
            digest = hashlib.sha256(f"{sigma}:{nonce}".encode()).hexdigest()
            commits.append(digest)
            self.bus.send(f"party-{party.index}", BROADCAST, "sigma-commit", digest.encode())

        self.bus.next_round()
        for party, sigma, nonce, digest in zip(self._parties, sigmas, nonces, commits):
            payload = f"{sigma}:{nonce}".encode()
            self.bus.send(f"party-{party.index}", BROADCAST, "sigma-reveal", payload)
            if hashlib.sha256(payload).hexdigest() != digest:
                raise MacCheckError("sigma reveal does not match its commitment")

        opened = list(self._pending_values)
        for party in self._parties:
            party.pending.clear()
        self._pending_values.clear()

        if sum(sigmas) % self.ctx.p != 0:
            raise MacCheckError(
                f"MAC check failed for a batch of {batch} opened values; aborting"
            )

    # ---- multiplication ----------------------------------------------------

    def mul_shares(
        self,
        x: list[AuthShare],
        y: list[AuthShare],
        triple: BeaverTriple,
    ) -> list[AuthShare]:
        """Beaver multiplication; consumes the triple."""
        triple.consume()
        d_shares = [sub_shares(self.ctx, xi, ai) for xi, ai in zip(x, triple.a)]
        e_shares = [sub_shares(self.ctx, yi, bi) for yi, bi in zip(y, triple.b)]
        d = self.partial_open(d_shares)
        e = self.partial_open(e_shares)
        return beaver_combine(self.ctx, triple, d, e)

    mul = mul_shares
