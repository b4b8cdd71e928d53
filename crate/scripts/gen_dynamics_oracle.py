#!/usr/bin/env python3
"""Generate the frozen dynamics oracle table for the native environments.

Transcribes the step functions of the reference OpenAI Gym classic-control
environments (CartPole-v0, Pendulum-v0, Acrobot-v1) and emits a CSV of
(state, action) -> (next state, reward, done) transitions. The Rust
implementations are required to match these rows componentwise to 1e-10.

Run from the repository root:

    python3 scripts/gen_dynamics_oracle.py > crates/ao2-core/tests/data/dynamics_oracle.csv
"""

import math

import numpy as np

# ---------------------------------------------------------------------------
# CartPole-v0 (gym/envs/classic_control/cartpole.py, Euler integrator)
# ---------------------------------------------------------------------------

GRAVITY = 9.8
MASSCART = 1.0
MASSPOLE = 0.1
TOTAL_MASS = MASSPOLE + MASSCART
LENGTH = 0.5  # half the pole's length
POLEMASS_LENGTH = MASSPOLE * LENGTH
FORCE_MAG = 10.0
TAU = 0.02
THETA_THRESHOLD = 12 * 2 * math.pi / 360
X_THRESHOLD = 2.4


def cartpole_step(state, action):
    x, x_dot, theta, theta_dot = state
    force = FORCE_MAG if action == 1 else -FORCE_MAG
    costheta = math.cos(theta)
    sintheta = math.sin(theta)
    temp = (force + POLEMASS_LENGTH * theta_dot**2 * sintheta) / TOTAL_MASS
    thetaacc = (GRAVITY * sintheta - costheta * temp) / (
        LENGTH * (4.0 / 3.0 - MASSPOLE * costheta**2 / TOTAL_MASS)
    )
    xacc = temp - POLEMASS_LENGTH * thetaacc * costheta / TOTAL_MASS
    x = x + TAU * x_dot
    x_dot = x_dot + TAU * xacc
    theta = theta + TAU * theta_dot
    theta_dot = theta_dot + TAU * thetaacc
    done = bool(
        x < -X_THRESHOLD
        or x > X_THRESHOLD
        or theta < -THETA_THRESHOLD
        or theta > THETA_THRESHOLD
    )
    return (x, x_dot, theta, theta_dot), 1.0, done


# ---------------------------------------------------------------------------
# Pendulum-v0 (gym/envs/classic_control/pendulum.py)
# ---------------------------------------------------------------------------

P_MAX_SPEED = 8.0
P_MAX_TORQUE = 2.0
P_DT = 0.05
P_G = 10.0
P_M = 1.0
P_L = 1.0


def angle_normalize(x):
    return ((x + math.pi) % (2 * math.pi)) - math.pi


def pendulum_step(state, u):
    th, thdot = state
    u = min(max(u, -P_MAX_TORQUE), P_MAX_TORQUE)
    costs = angle_normalize(th) ** 2 + 0.1 * thdot**2 + 0.001 * (u**2)
    newthdot = (
        thdot
        + (-3 * P_G / (2 * P_L) * math.sin(th + math.pi) + 3.0 / (P_M * P_L**2) * u)
        * P_DT
    )
    newth = th + newthdot * P_DT
    newthdot = min(max(newthdot, -P_MAX_SPEED), P_MAX_SPEED)
    return (newth, newthdot), -costs, False


# ---------------------------------------------------------------------------
# Acrobot-v1 (gym/envs/classic_control/acrobot.py, "book" variant, RK4)
# ---------------------------------------------------------------------------

A_DT = 0.2
LINK_LENGTH_1 = 1.0
LINK_MASS_1 = 1.0
LINK_MASS_2 = 1.0
LINK_COM_POS_1 = 0.5
LINK_COM_POS_2 = 0.5
LINK_MOI = 1.0
MAX_VEL_1 = 4 * math.pi
MAX_VEL_2 = 9 * math.pi
AVAIL_TORQUE = [-1.0, 0.0, +1.0]


def _dsdt(s_augmented, t):
    m1 = LINK_MASS_1
    m2 = LINK_MASS_2
    l1 = LINK_LENGTH_1
    lc1 = LINK_COM_POS_1
    lc2 = LINK_COM_POS_2
    I1 = LINK_MOI
    I2 = LINK_MOI
    g = 9.8
    a = s_augmented[-1]
    s = s_augmented[:-1]
    theta1 = s[0]
    theta2 = s[1]
    dtheta1 = s[2]
    dtheta2 = s[3]
    d1 = (
        m1 * lc1**2
        + m2 * (l1**2 + lc2**2 + 2 * l1 * lc2 * math.cos(theta2))
        + I1
        + I2
    )
    d2 = m2 * (lc2**2 + l1 * lc2 * math.cos(theta2)) + I2
    phi2 = m2 * lc2 * g * math.cos(theta1 + theta2 - math.pi / 2.0)
    phi1 = (
        -m2 * l1 * lc2 * dtheta2**2 * math.sin(theta2)
        - 2 * m2 * l1 * lc2 * dtheta2 * dtheta1 * math.sin(theta2)
        + (m1 * lc1 + m2 * l1) * g * math.cos(theta1 - math.pi / 2)
        + phi2
    )
    # "book" variant
    ddtheta2 = (
        a + d2 / d1 * phi1 - m2 * l1 * lc2 * dtheta1**2 * math.sin(theta2) - phi2
    ) / (m2 * lc2**2 + I2 - d2**2 / d1)
    ddtheta1 = -(d2 * ddtheta2 + phi1) / d1
    return dtheta1, dtheta2, ddtheta1, ddtheta2, 0.0


def rk4(derivs, y0, t):
    yout = np.zeros((len(t), len(y0)))
    yout[0] = y0
    for i in np.arange(len(t) - 1):
        thist = t[i]
        dt = t[i + 1] - thist
        dt2 = dt / 2.0
        y0 = yout[i]
        k1 = np.asarray(derivs(y0, thist))
        k2 = np.asarray(derivs(y0 + dt2 * k1, thist + dt2))
        k3 = np.asarray(derivs(y0 + dt2 * k2, thist + dt2))
        k4 = np.asarray(derivs(y0 + dt * k3, thist + dt))
        yout[i + 1] = y0 + dt / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4)
    return yout


def wrap(x, m, M):
    diff = M - m
    while x > M:
        x = x - diff
    while x < m:
        x = x + diff
    return x


def bound(x, m, M):
    return min(max(x, m), M)


def acrobot_step(state, action):
    torque = AVAIL_TORQUE[action]
    s_augmented = np.append(np.asarray(state, dtype=np.float64), torque)
    ns = rk4(_dsdt, s_augmented, [0, A_DT])[-1]
    ns = ns[:4]
    ns[0] = wrap(ns[0], -math.pi, math.pi)
    ns[1] = wrap(ns[1], -math.pi, math.pi)
    ns[2] = bound(ns[2], -MAX_VEL_1, MAX_VEL_1)
    ns[3] = bound(ns[3], -MAX_VEL_2, MAX_VEL_2)
    terminal = bool(-math.cos(ns[0]) - math.cos(ns[1] + ns[0]) > 1.0)
    reward = -1.0 if not terminal else 0.0
    return tuple(ns), reward, terminal


# ---------------------------------------------------------------------------
# Table generation
# ---------------------------------------------------------------------------


def fmt(v):
    return np.format_float_scientific(v, precision=16, unique=False)


def main():
    rng = np.random.default_rng(20260810)
    rows = []

    # CartPole: pinned origin and near-threshold cases, the rest random.
    cart = [((0.0, 0.0, 0.0, 0.0), 1), ((0.0, 0.0, 0.205, 1.0), 1)]
    while len(cart) < 20:
        s = tuple(rng.uniform([-2.3, -3.0, -0.2, -3.0], [2.3, 3.0, 0.2, 3.0]))
        cart.append((s, int(rng.integers(0, 2))))
    for s, a in cart:
        ns, r, d = cartpole_step(s, a)
        rows.append(("cartpole-v0", s, float(a), ns, r, d))

    # Pendulum: pinned upright/inverted/clip/wrap cases, random elsewhere.
    pend = [
        ((0.0, 0.0), 0.0),
        ((math.pi, 0.0), 2.0),
        ((0.0, 0.0), 5.0),
        ((-7.5, 3.0), -1.0),
        ((9.0, -7.9), 0.5),
    ]
    while len(pend) < 20:
        s = (float(rng.uniform(-math.pi, math.pi)), float(rng.uniform(-8.0, 8.0)))
        u = float(rng.uniform(-2.5, 2.5))
        pend.append((s, u))
    for s, u in pend:
        ns, r, d = pendulum_step(s, u)
        rows.append(("pendulum-v0", s + (0.0, 0.0), u, ns + (0.0, 0.0), r, d))

    # Acrobot: pinned hanging rest and inverted (terminal) cases.
    acro = [((0.0, 0.0, 0.0, 0.0), 2), ((math.pi, 0.0, 0.0, 0.0), 1)]
    while len(acro) < 20:
        s = tuple(
            rng.uniform(
                [-math.pi, -math.pi, -4 * math.pi, -9 * math.pi],
                [math.pi, math.pi, 4 * math.pi, 9 * math.pi],
            )
        )
        acro.append((s, int(rng.integers(0, 3))))
    for s, a in acro:
        ns, r, d = acrobot_step(s, a)
        rows.append(("acrobot-v1", s, float(a), ns, r, d))

    print("env,s0,s1,s2,s3,action,n0,n1,n2,n3,reward,done")
    for env, s, a, ns, r, d in rows:
        cols = (
            [env]
            + [fmt(x) for x in s]
            + [fmt(a)]
            + [fmt(x) for x in ns]
            + [fmt(r), "1" if d else "0"]
        )
        print(",".join(cols))


if __name__ == "__main__":
    main()
