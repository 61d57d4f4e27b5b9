"""Pure-Python event-loop kernels, the fallback for mdpsig._simcore.

Kept operation-for-operation identical to the compiled kernels so that
switching backends never changes a result, only the runtime.
"""

from __future__ import annotations

from math import exp


def run_average_block(dts, arrivals, actions, x, tau, t_limit, n_max, c, R):
    dts = dts.tolist()
    arrivals = arrivals.tolist()
    actions = actions.tolist()
    n = len(dts)
    cost = 0.0
    time_acc = 0.0
    i = 0
    while i < n and tau < t_limit:
        dt = dts[i]
        a = actions[x]
        cost += c * x * dt
        if arrivals[i]:
            if a == 0:
                cost += R
            elif x < n_max:
                x += 1
        else:
            if x > 0:
                x -= 1
        tau += dt
        time_acc += dt
        i += 1
    return i, x, tau, cost, time_acc


def run_discounted_block(dts, arrivals, actions, x, tau, t_limit, n_max, c, R, beta):
    dts = dts.tolist()
    arrivals = arrivals.tolist()
    actions = actions.tolist()
    n = len(dts)
    cost = 0.0
    time_acc = 0.0
    e0 = exp(-beta * tau)
    i = 0
    while i < n and tau < t_limit:
        dt = dts[i]
        a = actions[x]
        t1 = tau + dt
        e1 = exp(-beta * t1)
        cost += c * x * (e0 - e1) / beta
        if arrivals[i]:
            if a == 0:
                cost += R * e1
            elif x < n_max:
                x += 1
        else:
            if x > 0:
                x -= 1
        tau = t1
        e0 = e1
        time_acc += dt
        i += 1
    return i, x, tau, cost, time_acc
