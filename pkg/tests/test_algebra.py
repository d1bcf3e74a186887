import threading

import numpy as np
import pytest
from scipy import sparse

from fockgate.algebra import (
    ImageBasis,
    _gram_schmidt,
    build_frame,
    clear_frame_cache,
    complete_frame,
    decompose,
    dump_frame,
    from_coords,
    get_frame,
    image_algebra_basis,
    image_entries,
    image_generator,
    image_labels,
    inner_product,
    is_skew_hermitian,
    load_frame,
    orthonormalize,
    reconstruct,
    to_coords,
)
from fockgate.errors import DimensionMismatch, FrameCacheError, RankDeficient
from fockgate.fock_space import dimension, enumerate_basis
from fockgate.invariants import constants

R2 = np.sqrt(2)


def random_skew(rng, M):
    X = rng.normal(size=(M, M)) + 1j * rng.normal(size=(M, M))
    return (X - X.conj().T) / 2


def test_inner_product_examples():
    img = image_algebra_basis(enumerate_basis(2, 2))
    b2, b3 = img.element(("n", 0)), img.element(("n", 1))
    assert inner_product(b2, b2) == pytest.approx(5, abs=1e-14)
    assert inner_product(b2, b3) == pytest.approx(1, abs=1e-14)
    assert inner_product(np.zeros((3, 3), complex), np.zeros((3, 3), complex)) == 0
    with pytest.raises(DimensionMismatch):
        inner_product(np.zeros((2, 2)), np.zeros((3, 3)))


def test_inner_product_is_minus_trace_on_skew_hermitian():
    rng = np.random.default_rng(0)
    for M in (1, 3, 6):
        u, v = random_skew(rng, M), random_skew(rng, M)
        assert inner_product(u, v) == pytest.approx(inner_product(v, u))
        assert inner_product(u, v) == pytest.approx(-np.trace(u @ v).real)
        assert inner_product(u, v) == pytest.approx(0.5 * np.trace(u.conj().T @ v + v.conj().T @ u).real)


def test_coordinates_are_an_isometry():
    rng = np.random.default_rng(1)
    for M in (1, 2, 5):
        u, v = random_skew(rng, M), random_skew(rng, M)
        np.testing.assert_allclose(from_coords(to_coords(u), M), u, atol=1e-14)
        assert to_coords(u) @ to_coords(v) == pytest.approx(inner_product(u, v))
        # the coordinate basis is the canonical orthonormal basis of u(M)
        E = from_coords(np.eye(M * M), M)
        gram = np.array([[inner_product(a, b) for b in E] for a in E])
        np.testing.assert_allclose(gram, np.eye(M * M), atol=1e-14)
        assert all(is_skew_hermitian(e) for e in E)


def test_image_basis_matches_worked_matrices():
    img = image_algebra_basis(enumerate_basis(2, 2))
    assert img.labels == (("n", 0), ("n", 1), ("e", 1, 0), ("f", 1, 0))
    b1 = 0.5j * np.array([[0, R2, 0], [R2, 0, R2], [0, R2, 0]])
    b2 = 1j * np.diag([2, 1, 0])
    b3 = 1j * np.diag([0, 1, 2])
    b4 = 0.5 * np.array([[0, -R2, 0], [R2, 0, -R2], [0, R2, 0]])
    np.testing.assert_allclose(img.element(("e", 1, 0)), b1, atol=1e-15)
    np.testing.assert_allclose(img.element(("n", 0)), b2, atol=1e-15)
    np.testing.assert_allclose(img.element(("n", 1)), b3, atol=1e-15)
    np.testing.assert_allclose(img.element(("f", 1, 0)), b4, atol=1e-15)


def test_image_basis_small_cases():
    for n in range(1, 6):
        img = image_algebra_basis(enumerate_basis(1, n))
        assert len(img) == 1
        np.testing.assert_allclose(img.matrices()[0], [[1j * n]])
    img = image_algebra_basis(enumerate_basis(2, 1))
    mats = img.matrices()
    np.testing.assert_allclose(mats[0], 1j * np.diag([1, 0]))
    np.testing.assert_allclose(mats[1], 1j * np.diag([0, 1]))
    np.testing.assert_allclose(mats[2], 0.5j * np.array([[0, 1], [1, 0]]))
    np.testing.assert_allclose(mats[3], 0.5 * np.array([[0, -1], [1, 0]]))
    assert all(is_skew_hermitian(x) for x in mats)


def _flat_generators(basis):
    gen, r, c, v = image_entries(basis)
    M = basis.dim
    return sparse.csr_matrix((v, (gen, r * M + c)), shape=(basis.m**2, M * M))


def test_bulk_entries_match_single_generators():
    for m, n in [(2, 2), (3, 3), (4, 2), (1, 3), (5, 1)]:
        basis = enumerate_basis(m, n)
        F = _flat_generators(basis).toarray().reshape(m * m, basis.dim, basis.dim)
        for a, lab in enumerate(image_labels(m)):
            np.testing.assert_allclose(F[a], image_generator(basis, lab).toarray(), atol=1e-15)


def test_product_table_all_small_spaces():
    # every (m, n) with 2 <= M <= 120, kept sparse so that m = 120, n = 1 stays cheap
    checked = 0
    for m in range(2, 121):
        n = 1
        while dimension(m, n) <= 120:
            basis = enumerate_basis(m, n)
            F = _flat_generators(basis)
            G = (F.conj() @ F.T).real.tocsr()
            k = constants(m, n)
            B = k.B if n >= 2 else 0.0  # no two occupied modes when n = 1
            number = np.full((m, m), B)
            np.fill_diagonal(number, k.A)
            rest = np.full(m * m - m, 0.5 * (B + k.C))
            want = sparse.block_diag([sparse.csr_matrix(number), sparse.diags(rest)]).tocsr()
            diff = abs(G - want)
            assert diff.max() <= 1e-9 * max(1.0, k.A), f"(m,n)=({m},{n})"
            checked += 1
            n += 1
    assert checked > 150


def test_orthonormalize_two_two():
    img = image_algebra_basis(enumerate_basis(2, 2))
    frame = orthonormalize(img)
    T = frame.tangent_matrices()
    gram = np.array([[inner_product(a, b) for b in T] for a in T])
    np.testing.assert_allclose(gram, np.eye(4), atol=1e-10)
    # the span is unchanged: every generator projects back onto the tangent frame
    for b in img.coords:
        assert np.linalg.norm(b - frame.tangent.T @ (frame.tangent @ b)) < 1e-8


def test_orthonormalize_fixed_point_and_unit_norms():
    basis = enumerate_basis(2, 1)
    frame = orthonormalize(image_algebra_basis(basis))
    np.testing.assert_allclose(np.linalg.norm(frame.tangent, axis=1), 1, atol=1e-12)
    again = orthonormalize(ImageBasis(basis, image_labels(2), frame.tangent.copy()))
    np.testing.assert_allclose(again.tangent, frame.tangent, atol=1e-12)


def test_orthonormalize_rejects_dependent_generators():
    basis = enumerate_basis(2, 2)
    img = image_algebra_basis(basis)
    dup = np.vstack([img.coords[:3], img.coords[:1]])
    with pytest.raises(RankDeficient):
        orthonormalize(ImageBasis(basis, image_labels(2), dup))


@pytest.mark.parametrize("m,n,perp", [(2, 2, 5), (2, 1, 0), (2, 3, 12), (3, 2, 27), (3, 3, 91)])
def test_completion_counts_and_orthonormality(m, n, perp):
    frame = build_frame(enumerate_basis(m, n))
    assert frame.tangent.shape[0] == m * m
    assert frame.perpendicular.shape[0] == perp
    full = frame.all_coords()
    np.testing.assert_allclose(full @ full.T, np.eye(full.shape[0]), atol=1e-9)
    assert full.shape[0] == frame.M**2


def test_decompose_examples_and_reconstruction():
    frame = build_frame(enumerate_basis(2, 2))
    t, p = decompose(frame.tangent_matrices()[0], frame)
    np.testing.assert_allclose(t, [1, 0, 0, 0], atol=1e-12)
    np.testing.assert_allclose(p, 0, atol=1e-12)
    v = 1j * np.diag([0, 1, 0]).astype(complex)
    t, _ = decompose(v, frame)
    assert t @ t == pytest.approx(1 / 3, abs=1e-12)
    rng = np.random.default_rng(7)
    for m, n in [(2, 2), (3, 2), (2, 3)]:
        fr = get_frame(m, n)
        for _ in range(5):
            v = random_skew(rng, fr.M)
            t, p = decompose(v, fr)
            assert np.max(np.abs(reconstruct(t, p, fr) - v)) < 1e-8
    with pytest.raises(DimensionMismatch):
        decompose(np.zeros((2, 2)), frame)


def test_perpendicular_invariant_independent_of_completion():
    rng = np.random.default_rng(11)
    for m, n in [(2, 2), (3, 2), (2, 3)]:
        frame = get_frame(m, n)
        # a second completion from random seeds
        seeds = rng.normal(size=(frame.M**2, frame.M**2))
        alt = _gram_schmidt(seeds, frame.tangent, drop_tol=1e-8, strict=False, limit=frame.M**2 - m * m)
        assert alt.shape == frame.perpendicular.shape
        for _ in range(5):
            c = to_coords(random_skew(rng, frame.M))
            a, b = frame.perpendicular @ c, alt @ c
            assert a @ a == pytest.approx(b @ b, abs=1e-10)
            t = frame.tangent @ c
            assert a @ a == pytest.approx(c @ c - t @ t, abs=1e-10)


def test_frame_cache_is_shared_across_threads():
    clear_frame_cache()
    results = []

    def worker():
        results.append(get_frame(3, 3))

    threads = [threading.Thread(target=worker) for _ in range(8)]
    for th in threads:
        th.start()
    for th in threads:
        th.join()
    assert all(f is results[0] for f in results)
    assert get_frame(3, 3) is results[0]


def test_frame_dump_and_load(tmp_path):
    for m, n in [(2, 2), (2, 1), (3, 2)]:
        frame = get_frame(m, n)
        path = tmp_path / f"f{m}{n}.fgf"
        dump_frame(frame, path)
        back = load_frame(path, m, n)
        assert (back.m, back.n, back.M) == (m, n, frame.M)
        assert back.complete
        assert back.states == frame.states
        np.testing.assert_allclose(back.all_coords(), frame.all_coords(), atol=1e-15)
    tangent_only = orthonormalize(image_algebra_basis(enumerate_basis(2, 3)))
    dump_frame(tangent_only, tmp_path / "t.fgf")
    back = load_frame(tmp_path / "t.fgf")
    assert not back.complete and back.tangent.shape == (4, 16)


def test_frame_load_rejects_corruption(tmp_path):
    path = tmp_path / "f.fgf"
    frame = get_frame(2, 2)
    dump_frame(frame, path)
    raw = path.read_bytes()
    # a body that is orthonormal in coordinates but not skew-Hermitian
    mats = from_coords(frame.all_coords(), 3)
    mats[0, 0, 0] += 0.25
    path.write_bytes(raw[:48] + mats.astype("<c16").tobytes())
    with pytest.raises(FrameCacheError):
        load_frame(path)
    with pytest.raises(FrameCacheError):
        load_frame(path, 3, 2)
    for bad in (b"XXXXXXXX" + raw[8:], raw[:20], raw[:-16], raw[:-8] + np.float64(1.0).tobytes()):
        path.write_bytes(bad)
        with pytest.raises(FrameCacheError):
            load_frame(path)
