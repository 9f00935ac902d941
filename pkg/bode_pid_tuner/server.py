import json
import sys
from typing import Any, Dict, Optional, Union

from mcp.server.fastmcp import FastMCP

# Use absolute imports when running as a script
try:
    # When installed as a package
    from .logging_conf import configure_logging
    from .models import DeadTimePlant, DesignSpec, GaConfig, PidController, SimConfig, TuneMethod
    from .pipelines import TuningPipeline
except ImportError:
    # When run directly
    from bode_pid_tuner.logging_conf import configure_logging
    from bode_pid_tuner.models import DeadTimePlant, DesignSpec, GaConfig, PidController, SimConfig, TuneMethod
    from bode_pid_tuner.pipelines import TuningPipeline

logger = configure_logging("bode-pid-tuner.server")


mcp = FastMCP("bode-pid-tuner")

Document = Union[Dict[str, Any], str]


def _parse_document(value: Optional[Document], name: str) -> Dict[str, Any]:
    """Accept a mapping or a JSON-encoded mapping from the tool bridge."""
    if value is None:
        return {}
    if isinstance(value, str):
        value = json.loads(value)
    if not isinstance(value, dict):
        raise ValueError(f"{name} must be a JSON object")
    return value


def _failure(action: str, e: Exception) -> dict:
    if isinstance(e, json.JSONDecodeError):
        logger.error("JSON parsing error: %s", e)
        return {"error": f"JSON parsing error: {str(e)}", "status": "failed"}
    logger.error("Error %s: %s", action, e)
    return {"error": str(e), "status": "failed"}


@mcp.tool()
def analyze_plant(plant: Document, wc: float, pade_order: int = 1) -> dict:
    """Frequency response, static gain and slope estimates of a plant at one frequency.

    Args:
        plant: {"num": [...], "den": [...], "delay": seconds}
        wc: Analysis frequency in rad/s
        pade_order: Order of the rational delay surrogate used by the plain Bode estimate

    Returns:
        dict: Analysis document (angles in degrees)
    """
    try:
        logger.info("Analyzing plant at %s rad/s", wc)
        return TuningPipeline.analyze(DeadTimePlant.from_dict(_parse_document(plant, "plant")), wc, pade_order)
    except Exception as e:
        return _failure("analyzing plant", e)


@mcp.tool()
def tune_controller(
    plant: Document,
    spec: Document,
    method: str = "bode-delay",
    pade_order: int = 1,
    sim: Optional[Document] = None,
    ga_config: Optional[Document] = None,
) -> dict:
    """Tune a PID controller and verify it on the true delayed plant.

    Args:
        plant: {"num": [...], "den": [...], "delay": seconds}
        spec: {"wc": rad/s, "pm_deg": degrees, "psi_deg": degrees}
        method: "bode-delay", "pade" or "ga"
        pade_order: Padé order for the pade method and the GA reference
        sim: Optional {"dt", "horizon", "deriv_filter_n"}
        ga_config: Optional GA settings (population, generations, seed, ...)

    Returns:
        dict: Tune report
    """
    try:
        tune_method = TuneMethod.from_string(method)
        logger.info("Tuning controller with method %s", tune_method.value)
        outcome = TuningPipeline.tune(
            tune_method,
            DeadTimePlant.from_dict(_parse_document(plant, "plant")),
            DesignSpec.from_dict(_parse_document(spec, "spec")),
            SimConfig.from_dict(_parse_document(sim, "sim")),
            pade_order,
            GaConfig.from_dict(_parse_document(ga_config, "ga_config")),
        )
        return outcome.report.to_dict()
    except Exception as e:
        return _failure("tuning controller", e)


@mcp.tool()
def simulate_step(plant: Document, controller: Document, sim: Optional[Document] = None) -> dict:
    """Closed-loop unit-step response of a controller on a plant.

    Args:
        plant: {"num": [...], "den": [...], "delay": seconds}
        controller: {"kp", "ti", "td"} or {"kp", "ki", "kd"}
        sim: Optional {"dt", "horizon", "deriv_filter_n"}

    Returns:
        dict: Metrics, divergence flag, and the sampled t and y series
    """
    try:
        logger.info("Simulating closed-loop step")
        result = TuningPipeline.simulate(
            DeadTimePlant.from_dict(_parse_document(plant, "plant")),
            PidController.from_dict(_parse_document(controller, "controller")),
            SimConfig.from_dict(_parse_document(sim, "sim")),
        )
        return {
            "metrics": result.metrics.to_dict(),
            "diverged": result.diverged,
            "dt": result.dt,
            "t": result.t.tolist(),
            "y": result.y.tolist(),
        }
    except Exception as e:
        return _failure("simulating step", e)


@mcp.tool()
def compare_methods(
    plant: Document,
    spec: Document,
    pade_order: int = 1,
    sim: Optional[Document] = None,
    ga_config: Optional[Document] = None,
) -> dict:
    """Run the bode-delay, pade and ga pipelines side by side.

    Returns:
        dict: One report per method and the methods ranked by ITAE
    """
    try:
        logger.info("Comparing tuning methods")
        outcomes = TuningPipeline.compare(
            DeadTimePlant.from_dict(_parse_document(plant, "plant")),
            DesignSpec.from_dict(_parse_document(spec, "spec")),
            SimConfig.from_dict(_parse_document(sim, "sim")),
            pade_order,
            GaConfig.from_dict(_parse_document(ga_config, "ga_config")),
        )
        return TuningPipeline.comparison_document(outcomes)
    except Exception as e:
        return _failure("comparing methods", e)


def main():
    """Entry point for the MCP server."""
    logger.info("Starting bode-pid-tuner MCP server")

    # Ensure UTF-8 encoding for stdin/stdout
    if hasattr(sys.stdout, 'buffer') and sys.stdout.encoding != 'utf-8':
        import io
        sys.stdout = io.TextIOWrapper(sys.stdout.buffer, encoding='utf-8', line_buffering=True)
    if hasattr(sys.stdin, 'buffer') and sys.stdin.encoding != 'utf-8':
        import io
        sys.stdin = io.TextIOWrapper(sys.stdin.buffer, encoding='utf-8', line_buffering=True)

    sys.stdout.flush()

    mcp.run()


if __name__ == "__main__":
    main()
