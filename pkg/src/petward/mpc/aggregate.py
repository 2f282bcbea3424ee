"""Joint aggregates over per-party inputs: sum, mean numerator, and dot
product. Inputs are field elements (use encode_fixed for reals)."""

from __future__ import annotations

import random

from petward.mpc.context import (
    MpcContext,
    ProtocolError,
    TriplePool,
    add_share_vectors,
)
from petward.mpc.protocol import MpcSession

AGGREGATE_OPS = ("sum", "mean_numerator", "dot")


def secure_aggregate(
    ctx: MpcContext,
    inputs,
    op: str,
    rng: random.Random,
    pool: TriplePool | None = None,
) -> tuple[int, MpcSession]:
    """Run one aggregate and return (opened result, session).

    sum / mean_numerator: ``inputs`` is one field element per party.
    dot: ``inputs`` is a pair of equal-length vectors; each product
    consumes one triple from ``pool``.
    """
    session = MpcSession(ctx, rng)
    if op in ("sum", "mean_numerator"):
        if len(inputs) != ctx.n:
            raise ProtocolError(f"{op} needs one input per party ({ctx.n}), got {len(inputs)}")
        acc = session.distribute_input(inputs[0] % ctx.p)
        for x in inputs[1:]:
            acc = add_share_vectors(ctx, acc, session.distribute_input(x % ctx.p))
        return session.open_and_check(acc), session
    if op == "dot":
        u, v = inputs
        if len(u) != len(v):
            raise ProtocolError(f"dot requires equal-length vectors, got {len(u)} and {len(v)}")
        if pool is None:
            raise ProtocolError("dot requires a beaver triple pool from the offline phase")
        acc = None
        for a, b in zip(u, v):
            sa = session.distribute_input(a % ctx.p)
            sb = session.distribute_input(b % ctx.p)
            prod = session.mul_shares(sa, sb, pool.draw())
            acc = prod if acc is None else add_share_vectors(ctx, acc, prod)
        if acc is None:
            return 0, session
        return session.open_and_check(acc), session
    raise ProtocolError(f"unknown aggregate op {op!r}; choose from {AGGREGATE_OPS}")
