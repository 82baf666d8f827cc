"""Smoke test for the abflux extension module.

Build and install first:  pip install maturin && maturin develop -m crates/python/Cargo.toml
"""

import math

import abflux


def main():
    s = abflux.Solenoid(1e-3, 1e4, 0.1)
    mu0_ni = 4e-7 * math.pi * 1e3
    bz = s.b((0.0, 0.0, 0.0))[2]
    assert abs(bz / mu0_ni - 1.0) < 1e-9, bz

    e = abflux.Charge(-abflux.ELEMENTARY_CHARGE, (2e-3, 0.0, 0.0), (0.0, 1e5, 0.0))
    report = abflux.verify_eq2(e, s, 1e-3)
    assert report["rel_discrepancy"] < 1e-2, report

    try:
        abflux.Charge(-abflux.ELEMENTARY_CHARGE, (0.0, 0.0, 0.0), (2e8, 0.0, 0.0))
    except ValueError as err:
        assert "non-relativistic" in str(err)
    else:
        raise AssertionError("fast charge accepted without override")

    assert abs(abflux.ab_phase(abflux.FLUX_QUANTUM) - math.pi) < 1e-15
    assert abflux.parity_distinguishable(abflux.FLUX_QUANTUM, 2 * abflux.FLUX_QUANTUM, False)
    assert not abflux.parity_distinguishable(abflux.FLUX_QUANTUM, 2 * abflux.FLUX_QUANTUM, True)

    _, _, centroid, photon_ev = abflux.pulse_spectrum(2e8, 0.6e-6, 1024)
    assert 5e13 / 3 < centroid < 1.5e14
    assert not abflux.Shield().shields_ac(4.0, photon_ev)

    trace = abflux.run_experiment("ie")
    assert abs(trace["final_total_flux_quanta"][0] - 20.0) < 1e-3
    block, corner, expected, _ = abflux.lc_commutators(1e-9, 1e-12, 8)
    assert block < 1e-10 and abs(corner - expected) < 1e-10

    for check_id, name, passed, detail in abflux.verify_checks([5, 7, 9]):
        assert passed, (check_id, name, detail)
    print("abflux smoke test passed")


if __name__ == "__main__":
    main()
