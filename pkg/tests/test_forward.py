"""Growing dual families and fits one atom at a time."""

import json

import numpy as np
import pytest
from util import (
    block_dictionary,
    projector_deviations,
    random_dictionary,
    random_signal,
    rel_fro,
    sixty_degree_pair,
)

import biortho as b
from biortho import (
    Atom,
    Dictionary,
    Grid,
    GridMismatch,
    LinearlyDependent,
    Signal,
    add_atom,
    add_atom_with_coeffs,
    build_duals,
    dual_state_to_json,
    fit,
    init_duals,
    inner,
    norm_sq,
    oracle_duals,
    oracle_project,
    reconstruct,
    residual_norm_sq,
    save_dual_state_json,
)


def biortho_deviation(state):
    """max |inner(dual_n, atom_m) - delta_nm| over the active set."""
    w = state.grid.weights
    pair = state.dual_values @ (np.asarray(state.dictionary.values) * w).T
    return float(np.max(np.abs(pair - np.eye(state.n_atoms))))


class TestInitDuals:
    def test_single_unit_atom_is_self_dual(self, demo_grid):
        d = b.mexican_hat_dictionary(demo_grid, [0.0])
        st = init_duals(d)
        assert np.max(np.abs(st.dual_values[0] - d.values[0])) <= 1e-10
        assert st.dual_norm_sq[0] == pytest.approx(1.0, abs=1e-12)

    def test_norm_two_atom_gets_quarter_dual(self, demo_grid):
        base = b.mexican_hat_dictionary(demo_grid, [0.0]).atoms[0]
        scaled = Atom(1, Signal(demo_grid, 2.0 * base.signal.values), "scaled")
        st = init_duals(Dictionary((scaled,)))
        assert np.max(
            np.abs(st.dual_values[0] - scaled.signal.values / 4.0)
        ) <= 1e-12
        assert inner(st.duals[0], scaled.signal) == pytest.approx(1.0, abs=1e-12)

    def test_demo_center_atom_pairs_to_one(self, demo_dict):
        st = init_duals(demo_dict)
        assert inner(st.duals[0], demo_dict.atoms[0].signal) == pytest.approx(
            1.0, abs=1e-12
        )

    def test_first_atom_index_selects_position(self, demo_dict):
        st = init_duals(demo_dict, first_atom_index=3)
        assert st.dictionary.ids == (3,)

    def test_first_atom_index_validated(self, demo_dict):
        with pytest.raises(ValueError):
            init_duals(demo_dict, first_atom_index=0)
        with pytest.raises(ValueError):
            init_duals(demo_dict, first_atom_index=14)

    def test_last_residual_matches_atom_norm(self, demo_dict):
        st = init_duals(demo_dict)
        assert st.last_residual_norm_sq == pytest.approx(1.0, abs=1e-10)


class TestAddAtom:
    def test_orthonormal_pair_self_dual(self):
        d = block_dictionary(2, 6)
        st = init_duals(d)
        st = add_atom(st, d.atoms[1])
        assert np.max(np.abs(st.dual_values - d.values)) <= 1e-10
        assert np.max(np.abs(st.dual_norm_sq - 1.0)) <= 1e-10

    def test_sixty_degree_pair_analytic_duals(self):
        d = sixty_degree_pair()
        st = add_atom(init_duals(d), d.atoms[1])
        assert st.dual_norm_sq[0] == pytest.approx(4.0 / 3.0, abs=1e-10)
        assert st.dual_norm_sq[1] == pytest.approx(4.0 / 3.0, abs=1e-10)
        # residual norm of the second atom at 60 degrees is sin^2 = 3/4
        assert st.last_residual_norm_sq == pytest.approx(0.75, abs=1e-10)
        analytic = (4.0 / 3.0) * d.values[0] - (2.0 / 3.0) * d.values[1]
        assert np.max(np.abs(st.dual_values[0] - analytic)) <= 1e-10

    def test_duplicate_atom_rejected(self, demo_grid):
        d = b.mexican_hat_dictionary(demo_grid, [0.0, 0.0])
        st = init_duals(d)
        with pytest.raises(LinearlyDependent):
            add_atom(st, d.atoms[1])

    def test_dependent_combination_rejected(self):
        d = block_dictionary(2, 6)
        st = build_duals(d)
        mix = Atom(
            7,
            Signal(d.grid, 0.6 * d.values[0] + 0.8 * d.values[1]),
            "mix",
        )
        with pytest.raises(LinearlyDependent):
            add_atom(st, mix)

    def test_error_message_names_atom_id(self, demo_grid):
        d = b.mexican_hat_dictionary(demo_grid, [0.0, 0.0])
        st = init_duals(d)
        with pytest.raises(LinearlyDependent, match="id 2"):
            add_atom(st, d.atoms[1])

    def test_grid_mismatch(self, demo_dict):
        st = init_duals(demo_dict)
        alien = Atom(99, Signal(Grid(0.0, 1.0, 4), np.ones(4)), "alien")
        with pytest.raises(GridMismatch):
            add_atom(st, alien)

    def test_duplicate_id_rejected(self, demo_dict):
        st = init_duals(demo_dict)  # holds id 1
        clone = Atom(1, demo_dict.atoms[1].signal, "different values, same id")
        with pytest.raises(ValueError):
            add_atom(st, clone)

    def test_dep_tol_is_relative_to_atom_norm(self):
        d = block_dictionary(2, 6)
        st = init_duals(d)
        # the same direction scaled tiny must be rejected identically
        small = Atom(5, Signal(d.grid, 1e-6 * d.values[0]), "tiny-duplicate")
        with pytest.raises(LinearlyDependent):
            add_atom(st, small)

    def test_biorthogonality_after_every_add(self, demo_dict):
        st = init_duals(demo_dict)
        for atom in demo_dict.atoms[1:]:
            st = add_atom(st, atom)
            assert biortho_deviation(st) <= 1e-8

    def test_projector_identities_after_every_add(self, demo_dict):
        st = init_duals(demo_dict)
        for atom in demo_dict.atoms[1:]:
            st = add_atom(st, atom)
            idem, adj = projector_deviations(st)
            assert idem <= 1e-7
            assert adj <= 1e-7


class TestBuildDuals:
    def test_demo_matches_oracle(self, demo_state, demo_dict):
        ora = oracle_duals(demo_dict)
        assert rel_fro(demo_state.dual_values, ora.dual_values) <= 1e-6

    def test_demo_biorthogonality(self, demo_state):
        assert biortho_deviation(demo_state) <= 1e-8

    def test_duals_lie_in_active_span(self, demo_state, demo_dict):
        # project each dual onto the span with the oracle and compare
        w = demo_dict.grid.weights
        ora = oracle_duals(demo_dict)
        pair = ora.dual_values @ (w * demo_state.dual_values).T
        back = pair.T @ np.asarray(demo_dict.values)
        assert np.max(np.abs(back - demo_state.dual_values)) <= 1e-8 * max(
            1.0, float(np.max(np.abs(demo_state.dual_values)))
        )

    def test_random_dictionaries_match_oracle(self):
        rng = np.random.default_rng(2024)
        for coherent in (False, True):
            for _ in range(10):
                d = random_dictionary(rng, int(rng.integers(2, 9)), 50, coherent)
                st = build_duals(d)
                ora = oracle_duals(d)
                assert rel_fro(st.dual_values, ora.dual_values) <= 1e-6

    def test_pivoting_gives_same_duals(self, demo_dict):
        plain = build_duals(demo_dict)
        piv = build_duals(demo_dict, pivot=True)
        assert piv.dictionary.ids == plain.dictionary.ids
        assert rel_fro(piv.dual_values, plain.dual_values) <= 1e-7
        assert biortho_deviation(piv) <= 1e-8

    def test_pivoting_matches_oracle_on_random(self):
        rng = np.random.default_rng(77)
        for _ in range(5):
            d = random_dictionary(rng, 6, 40, coherent=True)
            piv = build_duals(d, pivot=True)
            ora = oracle_duals(d)
            assert rel_fro(piv.dual_values, ora.dual_values) <= 1e-6

    def test_duals_property_returns_signals(self, demo_state):
        sigs = demo_state.duals
        assert len(sigs) == 13
        assert all(s.grid == demo_state.grid for s in sigs)


class TestFit:
    def test_active_atom_gives_unit_vector(self, demo_state, demo_dict):
        f = demo_dict.atoms[0].signal
        ap = fit(demo_state, f)
        e1 = np.zeros(13)
        e1[0] = 1.0
        assert np.max(np.abs(ap.coeffs - e1)) <= 1e-8

    def test_orthogonal_signal_gives_zero_coeffs(self, demo_state, demo_dict):
        rng = np.random.default_rng(8)
        raw = random_signal(rng, demo_dict.grid)
        # explicitly deflate the signal against the span
        ap = fit(demo_state, raw)
        recon = reconstruct(demo_state, ap)
        perp = Signal(demo_dict.grid, raw.values - recon.values)
        ap2 = fit(demo_state, perp)
        assert np.max(np.abs(ap2.coeffs)) <= 1e-8
        assert ap2.approx_norm_sq <= 1e-12

    def test_demo_recovers_published_coefficients(self, demo_fit):
        dev = np.abs(demo_fit.coeffs - np.array(b.DEMO_COEFFS))
        assert np.max(dev) <= 5e-4

    def test_matches_oracle_projection(self, demo_state, demo_dict):
        rng = np.random.default_rng(9)
        f = random_signal(rng, demo_dict.grid)
        ap = fit(demo_state, f)
        ora = oracle_project(demo_dict, f)
        scale = max(1.0, float(np.max(np.abs(ora.coeffs))))
        assert np.max(np.abs(ap.coeffs - ora.coeffs)) <= 1e-7 * scale

    def test_residual_orthogonal_to_every_atom(self, demo_state, demo_dict):
        rng = np.random.default_rng(10)
        f = random_signal(rng, demo_dict.grid)
        ap = fit(demo_state, f)
        resid = Signal(demo_dict.grid, f.values - reconstruct(demo_state, ap).values)
        for atom in demo_dict.atoms:
            assert abs(inner(atom.signal, resid)) <= 1e-8 * max(
                1.0, np.sqrt(norm_sq(f))
            )

    def test_parseval_for_signal_in_span(self, demo_state, demo_dict, demo_f):
        # f lies in the span, so its norm splits over the dual pairing
        ap = fit(demo_state, demo_f)
        w = demo_dict.grid.weights
        f_dot_atoms = np.asarray(demo_dict.values) @ (w * demo_f.values)
        total = float(np.sum(f_dot_atoms * ap.coeffs))
        assert total == pytest.approx(norm_sq(demo_f), rel=1e-8)

    def test_energy_split(self, demo_state, demo_dict):
        rng = np.random.default_rng(12)
        f = random_signal(rng, demo_dict.grid)
        ap = fit(demo_state, f)
        assert norm_sq(f) == pytest.approx(
            ap.approx_norm_sq + residual_norm_sq(demo_state, ap), rel=1e-10
        )

    def test_grid_mismatch(self, demo_state):
        f = Signal(Grid(0.0, 1.0, 9), np.ones(9))
        with pytest.raises(GridMismatch):
            fit(demo_state, f)

    def test_approx_norm_consistent_with_reconstruction(self, demo_fit, demo_state):
        recon = reconstruct(demo_state, demo_fit)
        assert demo_fit.approx_norm_sq == pytest.approx(norm_sq(recon), rel=1e-8)


class TestAddAtomWithCoeffs:
    def test_orthogonal_new_atom_keeps_coeffs(self):
        d3 = block_dictionary(3, 5)
        two = Dictionary(d3.atoms[:2])
        st = build_duals(two)
        f = Signal(d3.grid, 2.0 * d3.values[0] - 1.0 * d3.values[1])
        ap = fit(st, f)
        st2, ap2 = add_atom_with_coeffs(st, ap, d3.atoms[2])
        assert np.max(np.abs(ap2.coeffs[:2] - ap.coeffs)) <= 1e-10
        assert abs(ap2.coeffs[2]) <= 1e-10

    def test_grow_full_demo_matches_direct_fit(self, demo_dict, demo_f):
        st = init_duals(demo_dict)
        ap = fit(st, demo_f)
        for atom in demo_dict.atoms[1:]:
            st, ap = add_atom_with_coeffs(st, ap, atom)
            direct = fit(st, demo_f)
            assert np.max(np.abs(ap.coeffs - direct.coeffs)) <= 1e-8
        assert np.max(np.abs(ap.coeffs - np.array(b.DEMO_COEFFS))) <= 5e-4

    def test_residual_direction_atom_captures_everything(self, demo_dict):
        rng = np.random.default_rng(13)
        sub = Dictionary(demo_dict.atoms[:4])
        st = build_duals(sub)
        f = random_signal(rng, demo_dict.grid)
        ap = fit(st, f)
        resid = f.values - reconstruct(st, ap).values
        rn = np.sqrt(float(np.sum(demo_dict.grid.weights * resid * resid)))
        extra = Atom(99, Signal(demo_dict.grid, resid / rn), "residual-direction")
        st2, ap2 = add_atom_with_coeffs(st, ap, extra)
        assert residual_norm_sq(st2, ap2) <= 1e-8

    def test_random_growth_matches_direct_fit(self):
        rng = np.random.default_rng(14)
        d = random_dictionary(rng, 7, 64, coherent=True)
        f = random_signal(rng, d.grid)
        st = init_duals(d)
        ap = fit(st, f)
        for atom in d.atoms[1:]:
            st, ap = add_atom_with_coeffs(st, ap, atom)
        direct = fit(build_duals(d), f)
        scale = max(1.0, float(np.max(np.abs(direct.coeffs))))
        assert np.max(np.abs(ap.coeffs - direct.coeffs)) <= 1e-8 * scale


class TestStateExport:
    def test_json_structure_and_roundtrip(self, demo_state, tmp_path):
        doc = dual_state_to_json(demo_state)
        assert list(doc.keys()) == ["grid", "atom_ids", "duals", "dual_norm_sq"]
        assert doc["atom_ids"] == list(range(1, 14))
        p = tmp_path / "state.json"
        save_dual_state_json(demo_state, p)
        parsed = json.loads(p.read_text())
        assert parsed["grid"] == {"t_min": -4.0, "t_max": 4.0, "n_points": 801}
        back = np.array(parsed["duals"])
        assert np.array_equal(back, demo_state.dual_values)  # 17g round-trips

    def test_json_export_deterministic(self, demo_state, tmp_path):
        p1, p2 = tmp_path / "a.json", tmp_path / "b.json"
        save_dual_state_json(demo_state, p1)
        save_dual_state_json(demo_state, p2)
        assert p1.read_bytes() == p2.read_bytes()
