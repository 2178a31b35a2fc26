"""Benchmark right-hand sides written out term by term, one state at a time.

Used as an independent reference for the vectorized vector fields.
"""

import math

DUFFING = {"alpha": 0.05, "gamma": 0.4, "omega": 1.3}

MU = 3.986e14 * 3600.0
R_ORBIT = 42164e3
M_CHASER = 500.0
K1 = [
    [-28.8287, 0.1005, -1449.9754, 0.0046],
    [-0.087, -33.2562, 0.00462, -1451.5013],
]
K2_CORRECTED = [
    [-288.0288, 0.1312, -9614.9898, 0.0],
    [-0.1312, -288.0, 0.0, -9614.9883],
]

G = 9.81
MASS = 1.0 + 4 * 0.1
JX = 0.4 * 1.0 * 0.1 ** 2 + 2 * 0.5 ** 2 * 0.1
JY = JX
JZ = 0.4 * 1.0 * 0.1 ** 2 + 4 * 0.5 ** 2 * 0.1


def duffing(state, t):
    x, y = state
    a, g, w = DUFFING["alpha"], DUFFING["gamma"], DUFFING["omega"]
    return [y, -a * y + x - x ** 3 + g * math.cos(w * t)]


def laub_loomis(s, t):
    x1, x2, x3, x4, x5, x6, x7 = s
    return [
        1.4 * x3 - 0.9 * x1,
        2.5 * x5 - 1.5 * x2,
        0.6 * x7 - 0.8 * x2 * x3,
        2.0 - 1.3 * x3 * x4,
        0.7 * x1 - x4 * x5,
        0.3 * x1 - 3.1 * x6,
        1.8 * x6 - 1.5 * x2 * x7,
    ]


def rendezvous(s, t):
    x, y, vx, vy = s
    n = math.sqrt(MU / R_ORBIT ** 3)
    if t >= 120.0:
        ux = uy = 0.0
    else:
        K = K2_CORRECTED if x >= -100.0 else K1
        ux = sum(k * v for k, v in zip(K[0], s))
        uy = sum(k * v for k, v in zip(K[1], s))
    rc = math.sqrt((R_ORBIT + x) ** 2 + y ** 2)
    return [
        vx,
        vy,
        n * n * x + 2 * n * vy + MU / R_ORBIT ** 2 - MU / R_ORBIT ** 3 * (R_ORBIT + x) + ux / M_CHASER,
        n * n * y - 2 * n * vx - MU / rc ** 3 * y + uy / M_CHASER,
    ]


def quadrotor(s, t):
    p_n, p_e, h, u, v, w, phi, theta, psi, p, q, r = s
    F = MASS * G - 10.0 * (h - 1.0) + 3.0 * w
    tau_phi = -phi - p
    tau_theta = -theta - q
    tau_psi = 0.0
    cphi, sphi = math.cos(phi), math.sin(phi)
    cth, sth = math.cos(theta), math.sin(theta)
    cpsi, spsi = math.cos(psi), math.sin(psi)
    return [
        cth * cpsi * u + (sphi * sth * cpsi - cphi * spsi) * v + (cphi * sth * cpsi + sphi * spsi) * w,
        cth * spsi * u + (sphi * sth * spsi + cphi * cpsi) * v + (cphi * sth * spsi - sphi * cpsi) * w,
        sth * u - sphi * cth * v - cphi * cth * w,
        r * v - q * w - G * sth,
        p * w - r * u + G * cth * sphi,
        q * u - p * v + G * cth * cphi - F / MASS,
        p + sphi * math.tan(theta) * q + cphi * math.tan(theta) * r,
        cphi * q - sphi * r,
        sphi / cth * q + cphi / cth * r,
        (JY - JZ) / JX * q * r + tau_phi / JX,
        (JZ - JX) / JY * p * r + tau_theta / JY,
        (JX - JY) / JZ * p * q + tau_psi / JZ,
    ]


EXPRESSIONS = {
    "duffing": duffing,
    "laub_loomis": laub_loomis,
    "rendezvous": rendezvous,
    "quadrotor": quadrotor,
}
