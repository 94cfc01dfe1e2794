"""Random pulse programs for round-trip and compilation tests."""

import random
from fractions import Fraction

from qclone.pulses import Angle, Crusher, Delay, PulseProgram, RfPulse

AXES = ("x", "y", "z", "-x", "-y", "-z")


def random_angle(rng: random.Random) -> Angle:
    if rng.random() < 0.7:
        return Angle(pi_multiple=Fraction(rng.randint(-12, 12), rng.randint(1, 12)))
    return Angle.rad(rng.uniform(-7, 7))


def random_event(rng: random.Random, crushers: bool = True):
    roll = rng.random()
    if roll < 0.6:
        return RfPulse(rng.choice("ab"), rng.choice(AXES), random_angle(rng))
    if roll < 0.9 or not crushers:
        kind = rng.choice(("tau1", "tau2", "explicit"))
        if kind == "explicit":
            return Delay("explicit", rng.choice((0.0, rng.uniform(0, 0.01))))
        return Delay(kind)
    return Crusher()


def random_program(rng: random.Random, max_len: int = 15, crushers: bool = True) -> PulseProgram:
    return PulseProgram(tuple(random_event(rng, crushers) for _ in range(rng.randint(0, max_len))))
