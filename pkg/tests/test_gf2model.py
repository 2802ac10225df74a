import itertools

import numpy as np
import pytest
from hypothesis import given, strategies as st

from garidec.errors import InvalidInputError, ModelInconsistencyError
from garidec.gf2model import (
    DetectorErrorModel,
    GariModel,
    SparseBitMatrix,
    Syndrome,
    assemble_augmented,
    augmented_syndrome,
    derive_uv,
    load_dem,
    merge_duplicate_columns,
    prior_to_llr,
    recover_physical_error,
    resolve_physical_error,
    save_dem,
)

from conftest import seeds, toy
from oracles import augmented_dense, gf2_matmul, gf2_matvec, match_columns, merged_prior_by_enumeration


def dem_from_dense(hx, hz, px, pz, pick_x, pick_z, p_y, obs=None):
    hx, hz = np.asarray(hx, np.uint8), np.asarray(hz, np.uint8)
    return DetectorErrorModel(
        dx=SparseBitMatrix.from_dense(hx),
        dz=SparseBitMatrix.from_dense(hz),
        dxp=SparseBitMatrix.from_dense(hx[:, pick_x].reshape(hx.shape[0], -1)),
        dzp=SparseBitMatrix.from_dense(hz[:, pick_z].reshape(hz.shape[0], -1)),
        priors_z=pz,
        priors_x=px,
        priors_y=p_y,
        observables=None if obs is None else SparseBitMatrix.from_dense(obs),
    )


# SparseBitMatrix -----------------------------------------------------------------


def test_entries_sorted_and_deduplicated_check():
    m = SparseBitMatrix(3, 3, [(2, 1), (0, 2), (0, 0)])
    assert m.entries.tolist() == [[0, 0], [0, 2], [2, 1]]
    with pytest.raises(InvalidInputError):
        SparseBitMatrix(2, 2, [(0, 0), (0, 0)])
    with pytest.raises(InvalidInputError):
        SparseBitMatrix(2, 2, [(2, 0)])
    with pytest.raises(InvalidInputError):
        SparseBitMatrix(2, 2, [(0, -1)])


@given(seeds)
def test_matvec_matmul_match_dense(seed):
    rng = np.random.default_rng(seed)
    a = rng.integers(0, 2, (4, 6), dtype=np.uint8)
    b = rng.integers(0, 2, (6, 5), dtype=np.uint8)
    x = rng.integers(0, 2, 6, dtype=np.uint8)
    A, B = SparseBitMatrix.from_dense(a), SparseBitMatrix.from_dense(b)
    assert np.array_equal(A.matvec(x), gf2_matvec(a, x))
    assert np.array_equal(A.matmul(B).to_dense(), gf2_matmul(a, b))
    assert np.array_equal(A.transpose().to_dense(), a.T)


def test_json_and_mtx_round_trip(tmp_path):
    m = SparseBitMatrix(3, 4, [(0, 1), (2, 3), (1, 0)])
    assert SparseBitMatrix.from_dict(m.to_dict()) == m
    m.write_mtx(tmp_path / "m.mtx")
    text = (tmp_path / "m.mtx").read_text().splitlines()
    assert text[0] == "%%MatrixMarket matrix coordinate integer general"
    assert text[1] == "3 4 3"
    assert text[2:] == ["1 2 1", "2 1 1", "3 4 1"]
    assert SparseBitMatrix.read_mtx(tmp_path / "m.mtx") == m
    (tmp_path / "p.mtx").write_text("%%MatrixMarket matrix coordinate pattern general\n% c\n2 2 1\n2 1\n")
    assert SparseBitMatrix.read_mtx(tmp_path / "p.mtx").entries.tolist() == [[1, 0]]


# merge_duplicate_columns ------------------------------------------------------------


def test_merge_distinct_columns_unchanged():
    m = SparseBitMatrix.from_dense([[1, 0, 1], [0, 1, 1]])
    out, p = merge_duplicate_columns(m, [0.1, 0.2, 0.3])
    assert out == m
    assert p.tolist() == [0.1, 0.2, 0.3]


def test_merge_two_identical_columns():
    m = SparseBitMatrix.from_dense([[1, 1], [0, 0]])
    out, p = merge_duplicate_columns(m, [0.1, 0.2])
    assert out.shape == (2, 1)
    assert p[0] == pytest.approx(0.26, abs=1e-15)
    assert p[0] == pytest.approx(merged_prior_by_enumeration([0.1, 0.2]), abs=1e-15)


def test_merge_three_half_priors():
    m = SparseBitMatrix.from_dense([[1, 1, 1]])
    _, p = merge_duplicate_columns(m, [0.5, 0.5, 0.5])
    assert p.tolist() == [0.5]


def test_merge_keeps_first_occurrence_order():
    m = SparseBitMatrix.from_dense([[0, 1, 0, 1], [1, 0, 1, 0]])
    out, p = merge_duplicate_columns(m, [0.1, 0.2, 0.3, 0.4])
    assert out.to_dense().tolist() == [[0, 1], [1, 0]]
    assert p.tolist() == pytest.approx([0.1 * 0.7 + 0.3 * 0.9, 0.2 * 0.6 + 0.4 * 0.8])


@pytest.mark.parametrize("bad", [[-0.1, 0.2], [0.5, 1.5], [float("nan"), 0.1]])
def test_merge_rejects_bad_priors(bad):
    with pytest.raises(InvalidInputError):
        merge_duplicate_columns(SparseBitMatrix.from_dense([[1, 1]]), bad)


@given(seeds)
def test_merge_idempotent_and_matches_enumeration(seed):
    rng = np.random.default_rng(seed)
    base = rng.integers(0, 2, (3, 4), dtype=np.uint8)
    cols = rng.integers(0, 4, 7)
    dense = base[:, cols]
    ps = rng.uniform(0, 1, 7)
    out, p = merge_duplicate_columns(SparseBitMatrix.from_dense(dense), ps)
    keys = [tuple(c) for c in out.to_dense().T]
    assert len(set(keys)) == len(keys)
    for k, q in zip(keys, p):
        group = [ps[j] for j in range(7) if tuple(dense[:, j]) == k]
        assert q == pytest.approx(merged_prior_by_enumeration(group), abs=1e-12)
    again, p2 = merge_duplicate_columns(out, p)
    assert again == out and np.array_equal(p2, p)


def test_prior_to_llr_convention():
    llr = prior_to_llr([0.5, 0.1, 0.0, 1.0])
    assert llr[0] == 0.0
    assert llr[1] == pytest.approx(np.log(9.0))
    assert llr[2] == 31.0 and llr[3] == -31.0
    assert prior_to_llr([0.0], ceiling=7.0)[0] == 7.0


# DetectorErrorModel -------------------------------------------------------------------


def test_dem_rejects_mismatched_y_columns():
    with pytest.raises(InvalidInputError):
        DetectorErrorModel(
            dx=SparseBitMatrix.from_dense([[1, 0]]), dz=SparseBitMatrix.from_dense([[1, 1]]),
            dxp=SparseBitMatrix(1, 2), dzp=SparseBitMatrix(1, 1),
            priors_z=[0.1, 0.1], priors_x=[0.1, 0.1], priors_y=[0.1, 0.1],
        )


def test_dem_json_round_trip(tmp_path):
    dem = toy(3)
    save_dem(dem, tmp_path / "d.json")
    back = load_dem(tmp_path / "d.json")
    assert back.to_dict() == dem.to_dict()


def test_load_dem_bad_file(tmp_path):
    (tmp_path / "x.json").write_text("{")
    with pytest.raises(InvalidInputError):
        load_dem(tmp_path / "x.json")
    with pytest.raises(InvalidInputError):
        load_dem(tmp_path / "missing.json")


# derive_uv ----------------------------------------------------------------------------


def test_derive_uv_identity_when_dxp_equals_dx():
    h = [[1, 0, 1], [0, 1, 1]]
    dem = dem_from_dense(h, h, [0.1] * 3, [0.1] * 3, [0, 1, 2], [0, 1, 2], [0.1] * 3)
    g = derive_uv(dem)
    assert np.array_equal(g.u.to_dense(), np.eye(3))
    assert np.array_equal(g.v.to_dense(), np.eye(3))


def test_derive_uv_sampling_map_4x6():
    rng = np.random.default_rng(5)
    hx = np.array([[1, 0, 0, 1, 1, 0], [0, 1, 0, 1, 0, 1], [0, 0, 1, 0, 1, 1], [1, 1, 1, 0, 0, 0]], np.uint8)
    pick = rng.integers(0, 6, 9)
    hz = np.array([[1, 1, 0], [0, 1, 1]], np.uint8)
    dem = dem_from_dense(hx, hz, [0.1] * 3, [0.1] * 6, pick, rng.integers(0, 3, 9), [0.05] * 9)
    g = derive_uv(dem)
    expected = np.zeros((6, 9), np.uint8)
    expected[pick, np.arange(9)] = 1
    assert np.array_equal(g.u.to_dense(), expected)
    assert np.array_equal(g.u.to_dense(), match_columns(hx, hx[:, pick]))


def test_derive_uv_llr_layout():
    dem = toy(11)
    g = derive_uv(dem)
    lz, lx, ly = (prior_to_llr(p) for p in (dem.priors_z, dem.priors_x, dem.priors_y))
    assert np.allclose(g.llr0, np.concatenate([lz, lx, ly, lz, lx]))


def test_derive_uv_unmatched_column():
    dem = DetectorErrorModel(
        dx=SparseBitMatrix.from_dense([[1, 0], [0, 1]]), dz=SparseBitMatrix.from_dense([[1, 1]]),
        dxp=SparseBitMatrix.from_dense([[1], [1]]), dzp=SparseBitMatrix.from_dense([[1]]),
        priors_z=[0.1, 0.1], priors_x=[0.1, 0.1], priors_y=[0.1],
    )
    with pytest.raises(ModelInconsistencyError):
        derive_uv(dem)


def test_derive_uv_rejects_repeated_base_columns():
    dem = DetectorErrorModel(
        dx=SparseBitMatrix.from_dense([[1, 1]]), dz=SparseBitMatrix.from_dense([[1, 1]]),
        dxp=SparseBitMatrix.from_dense([[1]]), dzp=SparseBitMatrix.from_dense([[1]]),
        priors_z=[0.1, 0.1], priors_x=[0.1, 0.1], priors_y=[0.1],
    )
    with pytest.raises(ModelInconsistencyError):
        derive_uv(dem)


@given(seeds)
def test_uv_unit_columns_and_products(seed):
    dem = toy(seed)
    g = derive_uv(dem)
    assert np.all(g.u.to_dense().sum(axis=0) == 1) or g.u.n_cols == 0
    assert np.all(g.v.to_dense().sum(axis=0) == 1) or g.v.n_cols == 0
    assert g.dx.matmul(g.u) == dem.dxp
    assert g.dz.matmul(g.v) == dem.dzp
    assert GariModel.from_dict(g.to_dict()).to_dict() == g.to_dict()


def test_gari_rejects_non_unit_columns():
    with pytest.raises(ModelInconsistencyError):
        GariModel(
            dx=SparseBitMatrix.from_dense([[1, 1]]), dz=SparseBitMatrix.from_dense([[1, 1]]),
            u=SparseBitMatrix.from_dense([[1], [1]]), v=SparseBitMatrix.from_dense([[1], [0]]),
            llr0=np.zeros(9),
        )


# assemble_augmented ----------------------------------------------------------------------


def test_augmented_identity_blocks_small():
    dem = dem_from_dense([[1, 0]], [[1, 1], [0, 1]], [0.1, 0.1], [0.1, 0.1], [1], [0], [0.1])
    a = assemble_augmented(derive_uv(dem)).to_dense()
    # rows: dx 0 | dz 1..2 | U 3..4 | V 5..6; cols: e_z 0..1 | e_x 2..3 | e_y 4 | ebar_z 5..6 | ebar_x 7..8
    assert a.shape == (7, 9)
    eye = [[1, 0], [0, 1]]
    assert a[3:5, 0:2].tolist() == eye and a[3:5, 5:7].tolist() == eye
    assert a[5:7, 2:4].tolist() == eye and a[5:7, 7:9].tolist() == eye
    assert a[3:5, 4].tolist() == [0, 1] and a[5:7, 4].tolist() == [1, 0]
    assert a[0, 5:7].tolist() == [1, 0] and a[0, :5].sum() == 0
    assert a[1:3, 7:9].tolist() == [[1, 1], [0, 1]]


@given(seeds)
def test_augmented_matches_dense_layout(seed):
    dem = toy(seed)
    g = derive_uv(dem)
    ref = augmented_dense(g.dx.to_dense(), g.dz.to_dense(), g.u.to_dense(), g.v.to_dense())
    assert np.array_equal(assemble_augmented(g).to_dense(), ref)


def test_syndrome_equivalence_exhaustive_small_models():
    for seed in range(25):
        dem = toy(seed, max_mechanisms=12)
        g = derive_uv(dem)
        a = assemble_augmented(g)
        h = dem.check_matrix.to_dense()
        for bits in itertools.product((0, 1), repeat=dem.n_mechanisms):
            e = np.array(bits, np.uint8)
            syn = dem.syndrome(e)
            assert np.array_equal(np.concatenate([syn.s_x, syn.s_z]), gf2_matvec(h, e))
            assert np.array_equal(a.matvec(g.lift(e)), augmented_syndrome(g, syn))


def test_gross_dimensions(gross_dem, gross_model):
    g = gross_model
    assert g.dx.shape == (792, 7920) and g.dz.shape == (936, 8784)
    assert g.u.shape == (7920, 51048) and g.v.shape == (8784, 51048)
    a = assemble_augmented(g)
    assert a.shape == (792 + 936 + 7920 + 8784, 7920 + 8784 + 51048 + 7920 + 8784)


# recover / resolve --------------------------------------------------------------------------


def small_model():
    dem = dem_from_dense([[1, 0]], [[1, 1], [0, 1]], [0.1, 0.1], [0.1, 0.1], [1], [0], [0.1])
    return dem, derive_uv(dem)


def test_recover_all_zero():
    _, g = small_model()
    rec = recover_physical_error(g, np.zeros(g.n_vars))
    assert rec.consistent and not rec.error.any()


def test_recover_single_y():
    dem, g = small_model()
    e = np.zeros(dem.n_mechanisms, np.uint8)
    e[-1] = 1
    rec = recover_physical_error(g, g.lift(e))
    assert rec.consistent and np.array_equal(rec.error, e)


def test_recover_flags_inconsistency():
    _, g = small_model()
    h = np.zeros(g.n_vars, np.uint8)
    h[g.slices["ebar_z"].start] = 1
    assert not recover_physical_error(g, h).consistent
    with pytest.raises(InvalidInputError):
        recover_physical_error(g, np.zeros(3))


@given(seeds, st.data())
def test_resolve_reproduces_auxiliary_syndrome(seed, data):
    dem = toy(seed)
    g = derive_uv(dem)
    h = np.array(data.draw(st.lists(st.integers(0, 1), min_size=g.n_vars, max_size=g.n_vars)), np.uint8)
    e = resolve_physical_error(g, h)
    syn = dem.syndrome(e)
    assert np.array_equal(syn.s_x, g.dx.matvec(h[g.slices["ebar_z"]]))
    assert np.array_equal(syn.s_z, g.dz.matvec(h[g.slices["ebar_x"]]))
    assert recover_physical_error(g, g.lift(e)).consistent


def test_syndrome_validation():
    _, g = small_model()
    with pytest.raises(InvalidInputError):
        Syndrome([0, 2], [0])
    with pytest.raises(InvalidInputError):
        Syndrome([0, 0], [0, 0]).check_against(g)
