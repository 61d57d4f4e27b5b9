# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled event-loop kernels for queue trajectory simulation.

Mirrors mdpsig._simpy exactly: both consume identical variate blocks and
apply identical floating-point operations in identical order, so the two
backends produce bit-identical sample costs.  Compiled with
-ffp-contract=off to keep that guarantee.
"""

from libc.math cimport exp


def run_average_block(double[::1] dts, unsigned char[::1] arrivals, long[::1] actions,
                      long x, double tau, double t_limit, long n_max,
                      double c, double R):
    """Consume events while the clock is below t_limit; return progress.

    Returns (events_consumed, state, clock, cost_increment, time_increment).
    """
    cdef Py_ssize_t i = 0
    cdef Py_ssize_t n = dts.shape[0]
    cdef double cost = 0.0
    cdef double time_acc = 0.0
    cdef double dt
    cdef long a
    with nogil:
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


def run_discounted_block(double[::1] dts, unsigned char[::1] arrivals, long[::1] actions,
                         long x, double tau, double t_limit, long n_max,
                         double c, double R, double beta):
    """Discounted variant: holding cost integrated continuously, penalties
    discounted at the event instant."""
    cdef Py_ssize_t i = 0
    cdef Py_ssize_t n = dts.shape[0]
    cdef double cost = 0.0
    cdef double time_acc = 0.0
    cdef double dt, t1, e1
    cdef double e0 = exp(-beta * tau)
    cdef long a
    with nogil:
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
