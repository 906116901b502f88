"""
Comandos del pipeline: identificar → sintetizar → verificar → simular → reportar.
Cada comando lee y escribe artefactos en config.output_dir.
"""
import math
import os
import re
import logging
from dataclasses import replace
from functools import reduce
from typing import Any, Dict, List, Optional, Sequence

import numpy as np
import pandas as pd

from cli.helpers import report_generator
from cli.helpers.artifacts import (
    KIND_CERTIFICATE, KIND_FRF, KIND_METRICS, KIND_RESULT, artifact_kind, read_json, write_csv, write_json,
)
from config import RunConfig
from convexify.helpers.replay import refine_grid, replay_constraints
from convexify.helpers.scp import synthesize
from convexify.models.conic_program import SynthesisOptions, SynthesisResult
from frf.models.frf_dataset import FrequencyGrid, FrfConfiguration, FrfDataset
from frf.utils.frf_io import load_frf, merge_datasets, save_frf
from plant_lab.helpers.excitation import grid_from_lines, multisine_lines
from plant_lab.helpers.frequency_response import bank_dataset
from plant_lab.helpers.identification import estimate_frf, identify_bank
from plant_lab.helpers.table_bank import make_table1_bank
from plant_lab.models.plants import PlantBank
from stability.utils.certificate import certify
from synth_core.helpers.q_filter import recover_q_filter, rigid_nominal_model
from synth_core.models.controller import ControllerParams, WeightSpec
from utils.errors import (
    CertificationError, ConfigError, DivergenceError, FrfParseError, GridMismatchError, ImproperFilterError,
    WindingError,
)
from validate.helpers.baseline import baseline_model_dob
from validate.helpers.closed_loop import measure_sensitivity, run_closed_loop
from validate.models.scenario import Scenario, standard_bands

logger = logging.getLogger(__name__)

RESULT_FILE = "synthesis_result.json"
CONTROLLER_FILE = "controller.json"
CERTIFICATE_FILE = "certificate.json"
METRICS_FILE = "metrics.json"
REPLAY_REFINEMENT = 4


def output_path(config: RunConfig, name: str) -> str:
    os.makedirs(config.output_dir, exist_ok=True)
    return os.path.join(config.output_dir, name)


def frf_file(config: RunConfig) -> str:
    return output_path(config, f"frf_joint{config.joint}.json")


def build_bank(config: RunConfig) -> PlantBank:
    return make_table1_bank(config.joint, config.n_configs, config.ts)


def design_lines(config: RunConfig) -> np.ndarray:
    return multisine_lines(config.period_length, config.n_lines, config.f_min_hz, config.ts)


def weight_spec(config: RunConfig) -> WeightSpec:
    return WeightSpec(config.sigma, config.tau, config.n, config.alpha)


def synthesis_options(config: RunConfig) -> SynthesisOptions:
    return SynthesisOptions(config.tol_obj, config.max_iter, config.zeta_init_hz, config.solver)


def _safe_name(label: str) -> str:
    return re.sub(r"[^A-Za-z0-9_.-]", "_", label)


def _load_record(path: str):
    """Registro CSV con columnas u (par) y q_dot (velocidad de carga)."""
    if not os.path.exists(path):
        logger.error(f"No existe el registro: {path}")
        raise FrfParseError(f"No existe el registro: {path}")
    try:
        frame = pd.read_csv(path, comment="#")
        return frame["u"].to_numpy(dtype=float), frame["q_dot"].to_numpy(dtype=float)
    except (KeyError, ValueError, pd.errors.ParserError) as e:
        logger.error(f"Registro mal formado {path}: {e}")
        raise FrfParseError(f"Registro mal formado {path} (se esperan columnas u y q_dot): {e}")


def cmd_identify(config: RunConfig) -> List[str]:
    """
    Genera el archivo FRF: identifica el banco sintético o procesa los archivos de datos.

    Returns:
        List[str]: Rutas de los archivos FRF escritos
    """
    lines = design_lines(config)
    if config.mode == "synthetic":
        bank = build_bank(config)
        if config.identify_method == "exact":
            dataset = bank_dataset(bank, grid_from_lines(lines, config.period_length, config.ts))
        else:
            rng = np.random.default_rng(config.seed) if config.seed is not None else None
            dataset = identify_bank(bank, config.period_length, config.periods, lines,
                                    config.excitation_rms, config.noise_db, rng)
    else:
        datasets = [load_frf(path, ts=config.ts) for path in config.frf_files]
        if config.record_files:
            labels = config.record_labels or [
                os.path.splitext(os.path.basename(path))[0] for path in config.record_files
            ]
            configurations = []
            for label, path in zip(labels, config.record_files):
                torque, velocity = _load_record(path)
                response = estimate_frf(torque, velocity, config.period_length, config.periods,
                                        lines, config.ts)
                configurations.append(FrfConfiguration(label, response))
            datasets.append(FrfDataset(grid_from_lines(lines, config.period_length, config.ts),
                                       configurations))
        dataset = reduce(merge_datasets, datasets)

    path = save_frf(dataset, frf_file(config))
    logger.info(f"Identificación: {len(dataset)} configuraciones × {len(dataset.grid)} líneas → {path}")
    return [path]


def _is_external(config: RunConfig, frf: Optional[str]) -> bool:
    return frf is not None and os.path.abspath(frf) != os.path.abspath(frf_file(config))


def _certification_dataset(config: RunConfig, dataset: FrfDataset, external: bool = False) -> FrfDataset:
    """
    Con planta sintética se certifica sobre la rejilla refinada del banco; con datos o con
    un archivo FRF externo, sobre el dataset cargado.

    Raises:
        GridMismatchError: Si el ts del FRF no coincide con el del banco sintético
    """
    if config.mode != "synthetic" or external:
        return dataset
    if not math.isclose(dataset.grid.ts, config.ts, rel_tol=1e-12, abs_tol=0.0):
        logger.error(f"ts del FRF ({dataset.grid.ts}) distinto del ts del banco ({config.ts})")
        raise GridMismatchError(f"El FRF tiene ts={dataset.grid.ts} y el banco sintético ts={config.ts}")
    return bank_dataset(build_bank(config), refine_grid(dataset.grid, REPLAY_REFINEMENT))


def _controller_export(config: RunConfig, result: SynthesisResult) -> Dict[str, Any]:
    payload = dict(result.params.to_dict(), ts=result.ts)
    if config.mode == "synthetic":
        inertia = build_bank(config).median_plant().total_inertia
        gn_num, gn_den = rigid_nominal_model(inertia, result.ts)
        try:
            payload["q_filter"] = recover_q_filter(result.params, gn_num, gn_den, result.ts).to_dict()
        except ImproperFilterError as e:
            logger.warning(f"No se pudo recuperar el filtro Q: {e}")
    return payload


def cmd_synthesize(config: RunConfig, frf: Optional[str] = None) -> str:
    """
    Sintetiza el DOB a partir del archivo FRF y adjunta verificación y certificado.

    Returns:
        str: Ruta del resultado de síntesis

    Raises:
        GridMismatchError: Si el FRF del banco sintético tiene otro ts
    """
    path = frf or frf_file(config)
    if not os.path.exists(path) and config.mode == "synthetic" and frf is None:
        logger.info("No hay archivo FRF; se ejecuta la identificación")
        cmd_identify(config)
    dataset = load_frf(path)
    certification = _certification_dataset(config, dataset, _is_external(config, frf))

    result = synthesize(dataset, weight_spec(config), (config.qn, config.qd), synthesis_options(config))

    replay = dict(result.replay)
    if certification is not dataset:
        refined = replay_constraints(certification, result.params,
                                     result.zeta, result.m_var, result.spec)
        replay["refined"] = refined.to_dict()
    try:
        certificate = certify(certification, result.params, result.lin_history).to_dict()
    except WindingError as e:
        certificate = {"passed": False, "error": str(e)}
    result = replace(result, replay=replay, certificate=certificate)

    write_json(_controller_export(config, result), output_path(config, CONTROLLER_FILE))
    return write_json(result.to_dict(), output_path(config, RESULT_FILE))


def load_result(path: str) -> SynthesisResult:
    """
    Raises:
        CertificationError: Si el archivo no es un resultado de síntesis válido
    """
    payload = read_json(path, error=CertificationError)
    try:
        return SynthesisResult.from_dict(payload)
    except (KeyError, TypeError, ValueError) as e:
        logger.error(f"Resultado de síntesis corrupto {path}: {e}")
        raise CertificationError(f"Resultado de síntesis corrupto {path}: {e}")


def cmd_verify(config: RunConfig, result_path: Optional[str] = None, frf: Optional[str] = None) -> str:
    """
    Certifica la estabilidad del controlador sintetizado.

    Returns:
        str: Ruta del certificado

    Raises:
        CertificationError: Si el resultado es ilegible o el certificado falla
    """
    result = load_result(result_path or output_path(config, RESULT_FILE))
    dataset = load_frf(frf or frf_file(config))
    certification = _certification_dataset(config, dataset, _is_external(config, frf))
    certificate = certify(certification, result.params, result.lin_history)
    path = write_json(certificate.to_dict(), output_path(config, CERTIFICATE_FILE))
    if not certificate.passed:
        raise CertificationError(f"Certificado de estabilidad fallido: {certificate.failures[:3]}")
    return path


def _scenario_plants(name: str, config: RunConfig, bank: PlantBank):
    if name == "inertia_sweep":
        scenario = Scenario.standard(name, config.duration, bank.inertias)
        scenario.check_bank_range(bank.inertias)
        return scenario, [("sweep", bank.plants[0])]
    return Scenario.standard(name, config.duration), list(zip(bank.labels, bank.plants))


def _measured_sensitivity(bank: PlantBank, controllers: Dict[str, Optional[ControllerParams]],
                          ts: float) -> Dict[str, Any]:
    grid = FrequencyGrid.logspace_hz(0.2, 100.0, 60, ts)
    measured: Dict[str, Any] = {}
    for name, params in controllers.items():
        if params is None:
            continue
        for label, plant in zip(bank.labels, bank.plants):
            try:
                line_grid, s = measure_sensitivity(plant, params, grid)
                entry = {"hz": line_grid.hz.tolist(), "magnitude": np.abs(s).tolist(),
                         "peak": float(np.max(np.abs(s))), "diverged": False}
            except DivergenceError as e:
                entry = {"diverged": True, "error": str(e)}
            measured.setdefault(name, {})[label] = entry
    return measured


def cmd_simulate(config: RunConfig, result_path: Optional[str] = None) -> str:
    """
    Simula los escenarios con el DOB optimizado, el DOB base y sin DOB.

    Returns:
        str: Ruta del JSON de métricas

    Raises:
        DivergenceError: Si el DOB optimizado diverge en algún escenario
    """
    result = load_result(result_path or output_path(config, RESULT_FILE))
    bank = build_bank(config)
    controllers = {
        "optimized": result.params,
        "baseline": baseline_model_dob(bank, config.baseline_cutoff_hz),
        "none": None,
    }
    bands = standard_bands(result.zeta)

    runs: Dict[str, Any] = {}
    divergences = []
    for name in config.scenarios:
        scenario, plants = _scenario_plants(name, config, bank)
        for label, plant in plants:
            for controller_name, params in controllers.items():
                run = run_closed_loop(plant, params, scenario, pd_zeta=result.zeta, band_edges=bands)
                runs.setdefault(controller_name, {}).setdefault(name, {})[label] = dict(
                    run.metrics.to_dict(), diverged=run.diverged, event=run.event
                )
                if run.diverged:
                    divergences.append({"controller": controller_name, "scenario": name, "config": label})
                if controller_name == "optimized":
                    write_csv(run.to_dataframe(),
                              output_path(config, f"trajectory_{name}_{_safe_name(label)}.csv"))

    payload = {
        "runs": runs,
        "band_edges": list(bands),
        "zeta": result.zeta,
        "scenarios": list(config.scenarios),
        "controllers": {name: params.to_dict() for name, params in controllers.items() if params is not None},
        "measured_sensitivity": _measured_sensitivity(bank, controllers, config.ts),
        "divergences": divergences,
    }
    path = write_json(payload, output_path(config, METRICS_FILE))

    optimized_divergences = [d for d in divergences if d["controller"] == "optimized"]
    if optimized_divergences:
        raise DivergenceError(f"El DOB optimizado diverge: {optimized_divergences}")
    return path


def cmd_report(config: RunConfig, artifacts: Sequence[str]) -> str:
    """
    Resumen legible (Markdown y PDF), agregado JSON y CSV para graficar.

    Returns:
        str: Ruta de summary.md

    Raises:
        ConfigError: Si la lista de artefactos está vacía, contiene tipos desconocidos o
            a un artefacto le faltan campos
    """
    if not artifacts:
        logger.error("No se indicaron artefactos para el reporte")
        raise ConfigError("La lista de artefactos está vacía")

    found: Dict[str, Any] = {}
    sources: Dict[str, str] = {}
    for path in artifacts:
        if path.lower().endswith(".csv"):
            found[KIND_FRF] = load_frf(path, ts=config.ts)
            continue
        payload = read_json(path)
        kind = artifact_kind(payload)
        sources[kind] = path
        if kind == KIND_FRF:
            found[kind] = load_frf(path)
        else:
            found[kind] = payload

    result = None
    if KIND_RESULT in found:
        try:
            result = SynthesisResult.from_dict(found[KIND_RESULT])
        except (KeyError, TypeError, ValueError) as e:
            logger.error(f"Resultado de síntesis corrupto {sources[KIND_RESULT]}: {e}")
            raise ConfigError(f"Resultado de síntesis corrupto {sources[KIND_RESULT]}: falta o es inválido {e}")
    try:
        return report_generator.generate_report(
            config.output_dir, result, found.get(KIND_CERTIFICATE), found.get(KIND_METRICS), found.get(KIND_FRF)
        )
    except KeyError as e:
        logger.error(f"Artefacto sin el campo {e}: {sorted(sources.values())}")
        raise ConfigError(f"Artefacto sin el campo esperado {e}")


def cmd_run(config: RunConfig) -> str:
    """Pipeline completo con una sola configuración."""
    frf_path = cmd_identify(config)[0]
    result_path = cmd_synthesize(config, frf_path)
    certificate_path = cmd_verify(config, result_path, frf_path)
    metrics_path = cmd_simulate(config, result_path)
    return cmd_report(config, [result_path, certificate_path, metrics_path, frf_path])
