"""
Simulación del DOB en lazo cerrado: u = u_ref − d̂ con d̂ = K·(q̇ − q̇_ref) y K = N/D
realizado en forma directa. Con referencia se cierra además un lazo de prealimentación + PD.
"""
import math
import logging
from typing import Dict, Optional, Sequence, Tuple, Union

import numpy as np
from scipy.signal import chirp

from frf.models.frf_dataset import FrequencyGrid
from plant_lab.helpers.excitation import schroeder_multisine
from plant_lab.helpers.frequency_response import plant_frf
from plant_lab.helpers.identification import estimate_frf, settling_periods
from plant_lab.models.plants import LINK_POS, LINK_VEL, MOTOR_POS, MOTOR_VEL, RigidPlant, TwoMassPlant
from synth_core.helpers.sensitivity import sensitivities
from synth_core.models.controller import ControllerParams
from utils.errors import DivergenceError, ImproperFilterError, ShortRecordError
from validate.helpers.spectrum import band_power_map
from validate.models.scenario import ClosedLoopRun, MetricsReport, Scenario, standard_bands

logger = logging.getLogger(__name__)

Plant = Union[TwoMassPlant, RigidPlant]

DIVERGENCE_NORM = 1e9
COULOMB_VELOCITY = 0.01
DEFAULT_PD_HZ = 1.0


def dob_filter_coefficients(params: ControllerParams) -> Tuple[np.ndarray, np.ndarray]:
    """
    Coeficientes (b, a) en potencias de z^{-1} de K = N/D, normalizados con a[0] = 1.

    Raises:
        ImproperFilterError: Si t_qd = 0 (K no causal)
    """
    if params.t[-1] == 0.0:
        raise ImproperFilterError("t_qd = 0: el filtro N/D no es realizable de forma causal")
    b = np.concatenate([np.zeros(params.qd - params.qn), params.h[::-1]])
    a = params.t[::-1]
    return b / a[0], a / a[0]


class LoopFilter:
    """Filtro IIR escalar en forma directa II transpuesta, evaluado muestra a muestra."""

    def __init__(self, params: ControllerParams):
        self.b, self.a = dob_filter_coefficients(params)
        self.state = np.zeros(self.a.size - 1)

    def step(self, value: float) -> float:
        output = self.b[0] * value + (self.state[0] if self.state.size else 0.0)
        for i in range(self.state.size - 1):
            self.state[i] = self.b[i + 1] * value - self.a[i + 1] * output + self.state[i + 1]
        if self.state.size:
            self.state[-1] = self.b[-1] * value - self.a[-1] * output
        return output


def _pd_gains(inertia: float, pd_zeta: Optional[float]) -> Tuple[float, float]:
    """Kp, Kd críticamente amortiguados a ω_pd = ζ/5 sobre la inercia rígida nominal."""
    omega = pd_zeta / 5.0 if pd_zeta else 2.0 * math.pi * DEFAULT_PD_HZ
    return inertia * omega ** 2, 2.0 * inertia * omega


def _reference(scenario: Scenario, time: np.ndarray):
    if not scenario.has_reference:
        zeros = np.zeros_like(time)
        return zeros, zeros, zeros
    w = 2.0 * math.pi * scenario.reference_hz
    a = scenario.reference_amplitude
    return a * np.sin(w * time), a * w * np.cos(w * time), -a * w ** 2 * np.sin(w * time)


def _external_disturbances(scenario: Scenario, time: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """Par de perturbación en el motor y en el eslabón (sin los términos dependientes del estado)."""
    motor = np.zeros_like(time)
    link = np.zeros_like(time)
    active = time >= scenario.start
    if scenario.disturbance == "step":
        motor[active] = scenario.magnitude
    elif scenario.disturbance == "chirp":
        f0, f1 = scenario.chirp_hz
        span = max(scenario.duration - scenario.start, 1e-9)
        motor[active] = scenario.magnitude * chirp(time[active] - scenario.start, f0, span, f1,
                                                   method="logarithmic")
    elif scenario.disturbance == "impact":
        pulse = active & (time < scenario.start + scenario.impact_width)
        link[pulse] = scenario.impact_gain * scenario.magnitude
    return motor, link


def simulate_loop(plant: Plant, controller: Optional[ControllerParams], scenario: Scenario,
                  motor_disturbance: np.ndarray, link_disturbance: np.ndarray,
                  pd_zeta: Optional[float] = None, nominal_inertia: Optional[float] = None) -> Dict:
    """
    Bucle de simulación muestra a muestra.

    Returns:
        Dict: Series registradas, 'diverged' y 'event'
    """
    ts = plant.ts
    n = motor_disturbance.size
    time = np.arange(n) * ts
    q_ref, qd_ref, qdd_ref = _reference(scenario, time)

    schedule = scenario.inertia_at(time)
    if schedule is not None and not isinstance(plant, TwoMassPlant):
        raise ValueError("El barrido de inercia requiere una planta de dos masas")
    inertia_rate = np.gradient(schedule, ts) if schedule is not None else np.zeros(n)
    if nominal_inertia is None:
        if schedule is not None:
            nominal_inertia = plant.motor_inertia + math.sqrt(schedule[0] * schedule[-1])
        else:
            nominal_inertia = plant.total_inertia
    kp, kd = _pd_gains(nominal_inertia, pd_zeta)

    dob = LoopFilter(controller) if controller is not None else None
    ad, bd, _, _ = plant.discrete_model()
    current_j = None

    names = ("torque", "disturbance", "estimate", "motor_pos", "motor_vel", "link_pos", "link_vel")
    record = {name: np.zeros(n) for name in names}
    x = np.zeros(4)
    diverged, event, steps = False, None, n

    for k in range(n):
        if schedule is not None and schedule[k] != current_j:
            current_j = schedule[k]
            ad, bd, _, _ = plant.with_link_inertia(current_j).discrete_model()

        q, q_dot = x[LINK_POS], x[LINK_VEL]
        u_ref = 0.0
        if scenario.has_reference:
            u_ref = nominal_inertia * qdd_ref[k] + kp * (q_ref[k] - q) + kd * (qd_ref[k] - q_dot)
        d_hat = dob.step(q_dot - qd_ref[k]) if dob is not None else 0.0
        u = u_ref - d_hat
        d_link = link_disturbance[k] - inertia_rate[k] * q_dot
        if scenario.coulomb:
            d_link -= scenario.coulomb * math.tanh(q_dot / COULOMB_VELOCITY)

        record["torque"][k] = u
        record["disturbance"][k] = motor_disturbance[k] + d_link
        record["estimate"][k] = d_hat
        record["motor_pos"][k], record["motor_vel"][k] = x[MOTOR_POS], x[MOTOR_VEL]
        record["link_pos"][k], record["link_vel"][k] = q, q_dot

        x = ad @ x + bd @ np.array([u + motor_disturbance[k], d_link])
        norm = float(np.linalg.norm(x))
        if not math.isfinite(norm) or norm > DIVERGENCE_NORM:
            diverged = True
            steps = k + 1
            event = {"time": float(time[k]), "step": k, "state_norm": norm}
            logger.warning(f"Divergencia en t={time[k]:.3f} s (|x|={norm:.3g})")
            break

    result = {name: values[:steps] for name, values in record.items()}
    result.update(reference_pos=q_ref[:steps], reference_vel=qd_ref[:steps], diverged=diverged, event=event)
    return result


def analytic_sensitivity(plant: Plant, controller: Optional[ControllerParams],
                         points: int = 2000, f_min_hz: float = 0.01) -> Tuple[FrequencyGrid, np.ndarray]:
    """|S| sobre una rejilla logarítmica densa de la planta (S = 1 sin controlador)."""
    grid = FrequencyGrid.logspace_hz(f_min_hz, 0.5 / plant.ts, points, plant.ts)
    if controller is None:
        return grid, np.ones(len(grid))
    s, _ = sensitivities(plant_frf(plant, grid), controller.h, controller.t, grid.omega)
    return grid, np.abs(s)


def _overshoot_pct(deviation: np.ndarray) -> float:
    if deviation.size == 0:
        return 0.0
    index = int(np.argmax(np.abs(deviation)))
    peak = abs(deviation[index])
    if peak == 0.0:
        return 0.0
    sign = math.copysign(1.0, deviation[index])
    opposite = float(np.max(-sign * deviation[index:]))
    return 100.0 * max(opposite, 0.0) / peak


def compute_metrics(plant: Plant, controller: Optional[ControllerParams], series: Dict, ts: float,
                    band_edges: Optional[Sequence[float]] = None) -> MetricsReport:
    grid, magnitude = analytic_sensitivity(plant, controller)
    below = np.nonzero(magnitude >= 1.0 / math.sqrt(2.0))[0]
    bandwidth = float(grid.hz[below[0]]) if below.size and below[0] > 0 else 0.0

    deviation = series["link_vel"] - series["reference_vel"]
    position_error = series["link_pos"] - series["reference_pos"]
    rmse = float(np.sqrt(np.mean(position_error ** 2))) if position_error.size else 0.0

    try:
        bands = band_power_map(deviation, ts, band_edges or standard_bands())
    except ShortRecordError:
        logger.warning("Registro demasiado corto para el espectro por bandas")
        bands = {}

    return MetricsReport(
        bandwidth_hz=bandwidth,
        sensitivity_peak=float(np.max(magnitude)),
        step_overshoot_pct=_overshoot_pct(deviation),
        rmse=rmse,
        power_spectrum=bands,
    )


def run_closed_loop(plant: Plant, controller: Optional[ControllerParams], scenario: Scenario,
                    pd_zeta: Optional[float] = None, band_edges: Optional[Sequence[float]] = None,
                    nominal_inertia: Optional[float] = None) -> ClosedLoopRun:
    """
    Simula un escenario con el DOB en el lazo.

    Args:
        plant (Plant): Planta (plantilla de J si el escenario tiene barrido de inercia)
        controller (ControllerParams, optional): Factor K = N/D; None simula sin DOB
        scenario (Scenario): Perturbación, referencia y duración
        pd_zeta (float, optional): ζ del DOB para fijar el PD en ζ/5
        band_edges (Sequence[float], optional): Bandas del espectro de potencia en Hz
        nominal_inertia (float, optional): Inercia rígida de la prealimentación y el PD

    Returns:
        ClosedLoopRun: Trayectorias, métricas y evento de divergencia si lo hubo
    """
    n = int(round(scenario.duration / plant.ts))
    time = np.arange(n) * plant.ts
    motor, link = _external_disturbances(scenario, time)
    series = simulate_loop(plant, controller, scenario, motor, link, pd_zeta, nominal_inertia)

    metric_plant = plant
    if scenario.inertia_schedule is not None:
        metric_plant = plant.with_link_inertia(scenario.inertia_schedule[0])
    metrics = compute_metrics(metric_plant, controller, series, plant.ts, band_edges)
    logger.info(
        f"Escenario '{scenario.name}': RMSE={metrics.rmse:.3e} rad, "
        f"sobreoscilación={metrics.step_overshoot_pct:.1f} %, divergencia={series['diverged']}"
    )
    return ClosedLoopRun(
        ts=plant.ts,
        torque=series["torque"],
        disturbance=series["disturbance"],
        estimate=series["estimate"],
        motor_pos=series["motor_pos"],
        motor_vel=series["motor_vel"],
        link_pos=series["link_pos"],
        link_vel=series["link_vel"],
        reference_pos=series["reference_pos"],
        reference_vel=series["reference_vel"],
        metrics=metrics,
        diverged=series["diverged"],
        event=series["event"],
    )


def measure_sensitivity(plant: Plant, controller: Optional[ControllerParams], grid: FrequencyGrid,
                        period_length: int = 8192, periods: int = 3,
                        amplitude: float = 0.1) -> Tuple[FrequencyGrid, np.ndarray]:
    """
    S empírica: multiseno de par en la entrada de perturbación del motor, con y sin DOB.
    S = FRF(perturbación → velocidad con DOB) / FRF(sin DOB) en cada línea.

    Args:
        plant (Plant): Planta
        controller (ControllerParams, optional): DOB; None da S = 1
        grid (FrequencyGrid): Frecuencias pedidas; se redondean a bins del periodo
        period_length (int): Muestras por periodo
        periods (int): Periodos (el primero se descarta)
        amplitude (float): RMS de la excitación en N·m

    Returns:
        Tuple[FrequencyGrid, np.ndarray]: Rejilla de líneas realmente excitadas y S medida

    Raises:
        DivergenceError: Si el lazo diverge durante la medida
    """
    lines = np.unique(np.round(grid.omega * period_length / (2.0 * math.pi)).astype(int))
    lines = lines[(lines >= 1) & (lines < period_length / 2)]
    excitation = schroeder_multisine(period_length, lines, amplitude, plant.ts, periods)
    # Precarga con un periodo extra de margen para la dinámica del DOB
    settle = settling_periods(plant, period_length) + 1
    drive = np.concatenate([np.tile(excitation.samples[:period_length], settle), excitation.samples])
    quiet = Scenario("sensitivity", "none", drive.size * plant.ts)
    zeros = np.zeros_like(drive)

    responses = []
    for dob in (controller, None):
        series = simulate_loop(plant, dob, quiet, drive, zeros)
        if series["diverged"]:
            raise DivergenceError(f"El lazo diverge durante la medida de S: {series['event']}")
        velocity = series["link_vel"][drive.size - excitation.samples.size:]
        responses.append(estimate_frf(excitation.samples, velocity, period_length,
                                      periods, lines, plant.ts))
    measured = responses[0] / responses[1]
    line_grid = FrequencyGrid(2.0 * math.pi * lines / period_length, plant.ts)
    return line_grid, measured
