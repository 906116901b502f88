"""Generador del resumen del pipeline (Markdown con jinja2, PDF y tablas CSV)."""
import os
import logging
from datetime import datetime
from typing import Any, Dict, List, Optional

import numpy as np
import pandas as pd
from jinja2 import Template

from cli.helpers.artifacts import write_csv, write_json
from cli.helpers.pdf_utils import generar_pdf
from convexify.models.conic_program import SynthesisResult
from frf.models.frf_dataset import FrfDataset
from synth_core.helpers.sensitivity import sensitivities
from synth_core.models.controller import ControllerParams
from utils.errors import ConfigError

logger = logging.getLogger(__name__)

TEMPLATE_PATH = os.path.join(os.path.dirname(os.path.dirname(__file__)), "templates", "summary.md.j2")


def sensitivity_curves(dataset: FrfDataset, controllers: Dict[str, ControllerParams]) -> pd.DataFrame:
    """|S| y |T| sobre la rejilla del FRF para cada controlador y configuración."""
    grid = dataset.grid
    frames = []
    for name, params in controllers.items():
        for config in dataset.configurations:
            s, t = sensitivities(config.response, params.h, params.t, grid.omega)
            frames.append(pd.DataFrame({
                "hz": grid.hz, "config": config.label, "controller": name,
                "abs_S": np.abs(s), "abs_T": np.abs(t),
            }))
    if not frames:
        return pd.DataFrame(columns=["hz", "config", "controller", "abs_S", "abs_T"])
    return pd.concat(frames, ignore_index=True)


def _run_rows(metrics: Dict[str, Any]):
    for controller, scenarios in sorted(metrics.get("runs", {}).items()):
        for scenario, configs in sorted(scenarios.items()):
            for label, run in sorted(configs.items()):
                yield controller, scenario, label, run


def rmse_table(metrics: Dict[str, Any]) -> pd.DataFrame:
    rows = [
        {"controller": controller, "scenario": scenario, "config": label, "rmse": run["rmse"],
         "overshoot_pct": run["step_overshoot_pct"], "bandwidth_hz": run["bandwidth_hz"],
         "sensitivity_peak": run["sensitivity_peak"], "diverged": run.get("diverged", False)}
        for controller, scenario, label, run in _run_rows(metrics)
    ]
    return pd.DataFrame(rows, columns=["controller", "scenario", "config", "rmse", "overshoot_pct",
                                       "bandwidth_hz", "sensitivity_peak", "diverged"])


def band_power_table(metrics: Dict[str, Any]) -> pd.DataFrame:
    rows = [
        {"controller": controller, "scenario": scenario, "config": label, "band": band, "power": power}
        for controller, scenario, label, run in _run_rows(metrics)
        for band, power in run.get("power_spectrum", {}).items()
    ]
    return pd.DataFrame(rows, columns=["controller", "scenario", "config", "band", "power"])


def certificate_table(certificate: Dict[str, Any]) -> pd.DataFrame:
    rows = [dict(info, config=label) for label, info in sorted(certificate.get("configs", {}).items())]
    columns = ["config", "wno_p", "wno_return_difference", "min_guard_p", "min_guard_d",
               "min_return_difference"]
    return pd.DataFrame(rows, columns=columns)


def aggregate(result: Optional[SynthesisResult], certificate: Optional[Dict[str, Any]],
              metrics: Optional[Dict[str, Any]], curves: pd.DataFrame) -> Dict[str, Any]:
    """Resumen determinista (sin marcas de tiempo) de todos los artefactos."""
    summary: Dict[str, Any] = {}
    if result is not None:
        summary["synthesis"] = {
            "zeta": result.zeta,
            "zeta_hz": result.zeta / (2.0 * np.pi),
            "m": result.m_var,
            "objective": result.objective,
            "iterations": result.iterations,
            "converged": result.converged,
            "status": result.status,
            "qn": result.params.qn,
            "qd": result.params.qd,
            "replay_passed": result.replay.get("passed"),
        }
    if certificate is not None:
        summary["certificate"] = {
            "passed": certificate.get("passed"),
            "failures": len(certificate.get("failures", [])),
        }
    if not curves.empty:
        peaks = curves.groupby("controller")["abs_S"].max()
        summary["peak_sensitivity"] = {name: float(value) for name, value in peaks.items()}
    if metrics is not None:
        table = rmse_table(metrics)
        if not table.empty:
            mean_rmse = table.groupby(["controller", "scenario"])["rmse"].mean()
            summary["mean_rmse"] = {
                f"{controller}/{scenario}": float(value) for (controller, scenario), value in mean_rmse.items()
            }
        summary["divergences"] = metrics.get("divergences", [])
    return summary


def render_summary(context: Dict[str, Any], template_path: str = TEMPLATE_PATH) -> str:
    if not os.path.exists(template_path):
        logger.error(f"No se encontró la plantilla: {template_path}")
        raise ConfigError(f"No se encontró la plantilla: {template_path}")
    with open(template_path, "r", encoding="utf-8") as file:
        template = Template(file.read(), trim_blocks=True, lstrip_blocks=True)
    return template.render(**context)


def _pdf_sections(summary: Dict[str, Any], tables: Dict[str, pd.DataFrame]) -> List[Dict[str, Any]]:
    sections = []
    if "synthesis" in summary:
        sections.append({"title": "Síntesis", "items": summary["synthesis"]})
    if "certificate" in summary:
        sections.append({"title": "Certificado de estabilidad", "items": summary["certificate"],
                         "table": tables["certificate"]})
    if "peak_sensitivity" in summary:
        sections.append({"title": "Pico de sensibilidad", "items": summary["peak_sensitivity"]})
    if not tables["rmse"].empty:
        sections.append({"title": "Escenarios", "table": tables["rmse"]})
    return sections


def generate_report(out_dir: str, result: Optional[SynthesisResult], certificate: Optional[Dict[str, Any]],
                    metrics: Optional[Dict[str, Any]], dataset: Optional[FrfDataset]) -> str:
    """
    Escribe summary.md, summary.pdf, aggregate.json y las tablas CSV.

    Args:
        out_dir (str): Directorio de salida
        result (SynthesisResult, optional): Resultado de síntesis
        certificate (Dict[str, Any], optional): Certificado; si falta se usa el embebido en el resultado
        metrics (Dict[str, Any], optional): Métricas de simulación
        dataset (FrfDataset, optional): FRF para las curvas de sensibilidad

    Returns:
        str: Ruta de summary.md
    """
    os.makedirs(out_dir, exist_ok=True)
    if certificate is None and result is not None:
        certificate = result.certificate

    controllers: Dict[str, ControllerParams] = {}
    if result is not None:
        controllers["optimized"] = result.params
    if metrics is not None and "baseline" in metrics.get("controllers", {}):
        controllers["baseline"] = ControllerParams.from_dict(metrics["controllers"]["baseline"])
    curves = sensitivity_curves(dataset, controllers) if dataset is not None else pd.DataFrame(
        columns=["hz", "config", "controller", "abs_S", "abs_T"]
    )

    tables = {
        "rmse": rmse_table(metrics or {}),
        "band_power": band_power_table(metrics or {}),
        "certificate": certificate_table(certificate or {}),
    }
    summary = aggregate(result, certificate, metrics, curves)

    write_json(summary, os.path.join(out_dir, "aggregate.json"))
    write_csv(curves, os.path.join(out_dir, "sensitivity_curves.csv"))
    write_csv(tables["band_power"], os.path.join(out_dir, "band_power.csv"))
    write_csv(tables["rmse"], os.path.join(out_dir, "rmse.csv"))

    context = {
        "generated": datetime.now().strftime("%Y-%m-%d %H:%M:%S"),
        "summary": summary,
        "certificate": certificate,
        "certificate_rows": tables["certificate"].to_dict("records"),
        "rmse_rows": tables["rmse"].to_dict("records"),
    }
    path = os.path.join(out_dir, "summary.md")
    with open(path, "w", encoding="utf-8") as f:
        f.write(render_summary(context))

    if generar_pdf(_pdf_sections(summary, tables), os.path.join(out_dir, "summary.pdf")) is None:
        logger.warning("No se generó summary.pdf")
    logger.info(f"Reporte escrito en {out_dir}")
    return path
