import json

import numpy as np
import numpy.testing as npt
import pytest

from frf.models.frf_dataset import FrequencyGrid, FrfConfiguration, FrfDataset
from frf.utils.frf_io import load_frf, merge_datasets, save_frf
from utils.errors import FrfParseError, FrfValidationError, GridMismatchError


def _write(tmp_path, payload, name="frf.json"):
    path = tmp_path / name
    path.write_text(json.dumps(payload), encoding="utf-8")
    return str(path)


def _payload(omega, re, im, ts=0.001, label="A"):
    return {"ts_seconds": ts, "omega": omega,
            "configurations": [{"label": label, "re": re, "im": im}]}


def _dataset(label="A", ts=0.001):
    grid = FrequencyGrid([0.01, 0.1, 1.0], ts)
    return FrfDataset(grid, [FrfConfiguration(label, [1 + 1j, 2.0, -0.5j])])


class TestFrequencyGrid:
    def test_rejects_unsorted_and_out_of_range(self):
        with pytest.raises(FrfValidationError):
            FrequencyGrid([0.1, 0.01], 0.001)
        with pytest.raises(FrfValidationError):
            FrequencyGrid([0.0, 0.1], 0.001)
        with pytest.raises(FrfValidationError):
            FrequencyGrid([0.1, 3.2], 0.001)

    def test_needs_two_points(self):
        with pytest.raises(FrfValidationError):
            FrequencyGrid([0.1], 0.001)

    def test_physical_frequencies(self):
        grid = FrequencyGrid.from_hz([1.0, 10.0], 0.001)
        npt.assert_allclose(grid.hz, [1.0, 10.0])
        npt.assert_allclose(grid.omega_phys, 2 * np.pi * np.array([1.0, 10.0]))

    def test_refine_keeps_endpoints(self):
        grid = FrequencyGrid([0.01, 0.1, 1.0], 0.001)
        fine = grid.refine(4)
        assert len(fine) == 9
        npt.assert_allclose(fine.omega[[0, 4, 8]], grid.omega)


class TestLoadFrf:
    def test_minimal_file(self, tmp_path):
        path = _write(tmp_path, _payload([0.01, 0.1, 1.0], [1.0, 0.5, 0.1], [0.0, -0.5, -0.1]))
        dataset = load_frf(path)
        assert len(dataset) == 1
        assert len(dataset.grid) == 3
        npt.assert_allclose(dataset.configurations[0].response, [1.0, 0.5 - 0.5j, 0.1 - 0.1j])

    def test_length_mismatch(self, tmp_path):
        path = _write(tmp_path, _payload([0.01, 0.1, 1.0], [1.0, 0.5], [0.0, -0.5]))
        with pytest.raises(FrfValidationError):
            load_frf(path)

    def test_nan_rejected(self, tmp_path):
        path = tmp_path / "nan.json"
        path.write_text(
            '{"ts_seconds": 0.001, "omega": [0.01, 0.1, 1.0], '
            '"configurations": [{"label": "A", "re": [1.0, NaN, 0.1], "im": [0.0, 0.0, 0.0]}]}',
            encoding="utf-8",
        )
        with pytest.raises(FrfValidationError):
            load_frf(str(path))

    def test_zero_magnitude_rejected(self, tmp_path):
        path = _write(tmp_path, _payload([0.01, 0.1, 1.0], [1.0, 0.0, 0.1], [0.0, 0.0, 0.0]))
        with pytest.raises(FrfValidationError):
            load_frf(path)

    def test_missing_and_malformed(self, tmp_path):
        with pytest.raises(FrfParseError):
            load_frf(str(tmp_path / "missing.json"))
        bad = tmp_path / "bad.json"
        bad.write_text("{not json", encoding="utf-8")
        with pytest.raises(FrfParseError):
            load_frf(str(bad))
        with pytest.raises(FrfParseError):
            load_frf(_write(tmp_path, {"omega": [0.1, 0.2]}, "schema.json"))

    @pytest.mark.parametrize("name", ["latin1.json", "latin1.csv"])
    def test_invalid_utf8_is_parse_error(self, tmp_path, name):
        path = tmp_path / name
        path.write_bytes(b"# ts_seconds=0.001\nomega,re_\xe1,im_\xe1\n0.1,1.0,0.0\n0.2,0.5,0.1\n")
        with pytest.raises(FrfParseError):
            load_frf(str(path))

    def test_empty_ts_header(self, tmp_path):
        path = tmp_path / "header.csv"
        path.write_text("# ts_seconds=\nomega,re_A,im_A\n0.1,1.0,0.0\n0.2,0.5,0.1\n", encoding="utf-8")
        with pytest.raises(FrfParseError):
            load_frf(str(path))

    def test_nested_lists_rejected(self, tmp_path):
        path = _write(tmp_path, _payload([[0.01, 0.1], [0.5, 1.0]], [1.0, 0.5, 0.1, 0.1], [0.0] * 4))
        with pytest.raises(FrfParseError):
            load_frf(path)
        path = _write(tmp_path, _payload([0.01, 0.1], [[1.0], [0.5]], [[0.0], [0.1]]), "column.json")
        with pytest.raises(FrfParseError):
            load_frf(path)
        with pytest.raises(FrfValidationError):
            FrfConfiguration("A", np.ones((2, 2)))

    def test_re_im_size_mismatch_is_parse_error(self, tmp_path):
        path = _write(tmp_path, _payload([0.01, 0.1, 1.0], [1.0, 0.5, 0.1], [0.0, 0.1]))
        with pytest.raises(FrfParseError):
            load_frf(path)

    @pytest.mark.parametrize("name", ["frf.json", "frf.csv"])
    def test_save_load_is_exact(self, tmp_path, name):
        dataset = _dataset()
        loaded = load_frf(save_frf(dataset, str(tmp_path / name)))
        assert loaded.grid.ts == dataset.grid.ts
        npt.assert_array_equal(loaded.grid.omega, dataset.grid.omega)
        npt.assert_array_equal(loaded.responses, dataset.responses)

    def test_csv_without_ts(self, tmp_path):
        path = tmp_path / "plain.csv"
        path.write_text("omega,re_A,im_A\n0.1,1.0,0.0\n0.2,0.5,-0.5\n", encoding="utf-8")
        with pytest.raises(FrfParseError):
            load_frf(str(path))
        assert load_frf(str(path), ts=0.002).grid.ts == 0.002

def _valid_file(tmp_path, name):
    grid = FrequencyGrid.logspace_hz(0.5, 200.0, 12, 0.001)
    response = 1.0 / (1j * grid.omega_phys + 2.0)
    dataset = FrfDataset(grid, [FrfConfiguration("A", response), FrfConfiguration("B", 2.0 * response)])
    return save_frf(dataset, str(tmp_path / name))


class TestCorruptedFiles:
    """Toda corrupción termina en FrfParseError (FrfValidationError es su subclase semántica)."""

    @pytest.mark.parametrize("seed", range(10))
    @pytest.mark.parametrize("name", ["frf.json", "frf.csv"])
    def test_invalid_byte(self, tmp_path, seed, name):
        path = _valid_file(tmp_path, name)
        data = bytearray(open(path, "rb").read())
        position = np.random.default_rng(seed).integers(0, len(data))
        data[position] = 0xFF
        open(path, "wb").write(bytes(data))
        with pytest.raises(FrfParseError):
            load_frf(path)

    @pytest.mark.parametrize("fraction", [0.1, 0.3, 0.5, 0.7, 0.9])
    def test_truncated_json(self, tmp_path, fraction):
        path = _valid_file(tmp_path, "frf.json")
        text = open(path, encoding="utf-8").read()
        open(path, "w", encoding="utf-8").write(text[: int(len(text) * fraction)])
        with pytest.raises(FrfParseError):
            load_frf(path)

    @pytest.mark.parametrize("row", [1, 4, 9])
    def test_csv_row_cut_after_comma(self, tmp_path, row):
        path = _valid_file(tmp_path, "frf.csv")
        lines = open(path, encoding="utf-8").read().splitlines()
        data_rows = [i for i, line in enumerate(lines) if line and not line.startswith("#")][1:]
        target = data_rows[row]
        lines[target] = lines[target][: lines[target].index(",") + 1]
        open(path, "w", encoding="utf-8").write("\n".join(lines) + "\n")
        with pytest.raises(FrfValidationError):
            load_frf(path)

    @pytest.mark.parametrize("mutation", ["nan", "inf", "reversed", "nested"])
    def test_corrupted_values(self, tmp_path, mutation):
        payload = json.loads(open(_valid_file(tmp_path, "frf.json"), encoding="utf-8").read())
        if mutation == "nan":
            payload["configurations"][0]["re"][3] = float("nan")
        elif mutation == "inf":
            payload["configurations"][1]["im"][0] = float("inf")
        elif mutation == "reversed":
            payload["omega"] = payload["omega"][::-1]
        else:
            payload["configurations"][0]["im"] = [[v] for v in payload["configurations"][0]["im"]]
        path = tmp_path / "mutated.json"
        path.write_text(json.dumps(payload), encoding="utf-8")
        with pytest.raises(FrfParseError) as info:
            load_frf(str(path))
        expected = FrfParseError if mutation == "nested" else FrfValidationError
        assert isinstance(info.value, expected)
        assert info.value.exit_code == 2



class TestMerge:
    def test_merge_two_sets(self):
        merged = merge_datasets(_dataset("A"), _dataset("B"))
        assert merged.labels == ["A", "B"]

    def test_merge_differing_ts(self):
        with pytest.raises(GridMismatchError):
            merge_datasets(_dataset(ts=0.001), _dataset(ts=0.002))

    def test_merge_with_itself_dedups_labels(self):
        dataset = _dataset("A")
        merged = merge_datasets(dataset, dataset)
        assert len(merged) == 2
        assert len(set(merged.labels)) == 2
