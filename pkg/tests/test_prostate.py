import io

import numpy as np
import pytest

import steinlasso as sl
from steinlasso.errors import DataError
from steinlasso.prostate import FEATURES, packaged_data_path


@pytest.fixture(scope="module")
def canonical_text() -> str:
    return packaged_data_path().read_text()


class TestLoadCanonical:
    def test_dimensions_and_names(self, prostate):
        assert prostate.n == 97
        assert prostate.p == 8
        assert prostate.feature_names == FEATURES

    def test_train_flag_carried_as_metadata_not_used_to_drop(self, prostate):
        train = prostate.metadata["train"]
        assert train.dtype == bool
        assert train.sum() == 67  # the customary split, but all 97 rows are kept
        assert prostate.n == 97

    def test_known_marginals(self, prostate):
        assert float(prostate.y.mean()) == pytest.approx(2.478, abs=5e-4)
        svi = prostate.X[:, FEATURES.index("svi")]
        assert set(np.unique(svi)) == {0.0, 1.0}
        gleason = prostate.X[:, FEATURES.index("gleason")]
        assert set(np.unique(gleason)) <= {6.0, 7.0, 8.0, 9.0}


class TestFormatTolerance:
    def test_tab_separated_variant(self, canonical_text):
        tabbed = canonical_text.replace(",", "\t")
        d = sl.load_prostate(tabbed.encode())
        ref = sl.load_prostate()
        assert np.array_equal(d.X, ref.X)
        assert np.array_equal(d.y, ref.y)

    def test_r_style_unnamed_rowname_column(self, canonical_text):
        # R write.table style: whitespace-separated, header lacking the
        # row-name field that every data row carries
        lines = canonical_text.strip().splitlines()
        header = lines[0].split(",")
        body = [ln.split(",") for ln in lines[1:]]
        text = " ".join(header[:-1]) + "\n"  # drop train to vary the shape too
        for i, row in enumerate(body, start=1):
            text += " ".join([str(i)] + row[:-1]) + "\n"
        d = sl.load_prostate(text.encode())
        ref = sl.load_prostate()
        assert np.array_equal(d.X, ref.X)
        assert d.row_labels == tuple(str(i) for i in range(1, 98))
        assert "train" not in d.metadata

    def test_shuffled_rows_same_data_up_to_order(self, canonical_text):
        lines = canonical_text.strip().splitlines()
        rng = np.random.default_rng(80)
        body = list(lines[1:])
        rng.shuffle(body)
        d = sl.load_prostate("\n".join([lines[0]] + body).encode())
        ref = sl.load_prostate()
        have = sorted(map(tuple, np.column_stack([d.X, d.y]).tolist()))
        want = sorted(map(tuple, np.column_stack([ref.X, ref.y]).tolist()))
        assert have == want
        # full-data fits are permutation invariant
        sd_a, sd_b = sl.standardize(d), sl.standardize(ref)
        lam = 0.3 * sl.lambda_max(sd_b)
        fa = sl.fit_lasso(sd_a, sl.LassoConfig(lam))
        fb = sl.fit_lasso(sd_b, sl.LassoConfig(lam))
        np.testing.assert_allclose(fa.slopes, fb.slopes, atol=1e-9)

    def test_file_object_source(self, canonical_text):
        d = sl.load_prostate(io.StringIO(canonical_text))
        assert d.n == 97


class TestSchemaErrors:
    def test_missing_column_named(self, canonical_text):
        lines = canonical_text.strip().splitlines()
        idx = lines[0].split(",").index("pgg45")
        drop = lambda ln: ",".join(v for i, v in enumerate(ln.split(",")) if i != idx)
        text = "\n".join(drop(ln) for ln in lines)
        with pytest.raises(DataError, match="pgg45"):
            sl.load_prostate(text.encode())

    def test_unknown_column_rejected(self, canonical_text):
        lines = canonical_text.strip().splitlines()
        text = "\n".join(
            [lines[0] + ",mystery"] + [ln + ",1.0" for ln in lines[1:]]
        )
        with pytest.raises(DataError, match="mystery"):
            sl.load_prostate(text.encode())

    def test_wrong_row_count(self, canonical_text):
        lines = canonical_text.strip().splitlines()
        with pytest.raises(DataError, match="97"):
            sl.load_prostate("\n".join(lines[:-1]).encode())
        with pytest.raises(DataError, match="97"):
            sl.load_prostate("\n".join(lines + [lines[-1]]).encode())

    def test_non_numeric_cell_coordinates(self, canonical_text):
        lines = canonical_text.strip().splitlines()
        row5 = lines[5].split(",")
        row5[0] = "oops"
        lines[5] = ",".join(row5)
        with pytest.raises(DataError, match=r"'lcavol' at data row 5"):
            sl.load_prostate("\n".join(lines).encode())

    def test_out_of_range_svi(self, canonical_text):
        lines = canonical_text.strip().splitlines()
        cols = lines[0].split(",")
        row3 = lines[3].split(",")
        row3[cols.index("svi")] = "2"
        lines[3] = ",".join(row3)
        with pytest.raises(DataError, match="svi .* row 3"):
            sl.load_prostate("\n".join(lines).encode())

    def test_out_of_range_gleason_and_age(self, canonical_text):
        lines = canonical_text.strip().splitlines()
        cols = lines[0].split(",")
        bad = lines[:]
        row = bad[10].split(",")
        row[cols.index("gleason")] = "5"
        bad[10] = ",".join(row)
        with pytest.raises(DataError, match="gleason"):
            sl.load_prostate("\n".join(bad).encode())
        bad = lines[:]
        row = bad[7].split(",")
        row[cols.index("age")] = "150"
        bad[7] = ",".join(row)
        with pytest.raises(DataError, match="age"):
            sl.load_prostate("\n".join(bad).encode())

    def test_missing_file_names_path(self, tmp_path):
        with pytest.raises(DataError, match="no_such_file.csv"):
            sl.load_prostate(tmp_path / "no_such_file.csv")


class TestRoundTrip:
    def test_export_reimport_identical(self, prostate, tmp_path):
        out = tmp_path / "prostate_copy.csv"
        sl.export_prostate(prostate, out)
        again = sl.load_prostate(out)
        assert np.array_equal(again.X, prostate.X)
        assert np.array_equal(again.y, prostate.y)
        assert np.array_equal(again.metadata["train"], prostate.metadata["train"])
        # a second round trip is byte-identical
        buf = io.StringIO()
        sl.export_prostate(again, buf)
        assert buf.getvalue() == out.read_text()
