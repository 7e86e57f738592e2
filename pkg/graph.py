from typing import TypedDict, Annotated, Optional, Dict, Any, List, Callable
import operator
import logging

from langgraph.graph import StateGraph, END

from agents import exit_code_for

logger = logging.getLogger(__name__)


class SweepState(TypedDict):
    """
    Shared state of one command run.
    State flows: Config → Model → (Full-Order | Reduced | Oracle) → Report,
    or Scaling → Report for rescaling an existing sweep.
    """

    # INPUT - command line
    command: str
    config_path: Optional[str]
    overrides: Optional[Dict[str, Any]]           # {out, threads, tol, snapshots, spacing, outputs}
    scale_request: Optional[Dict[str, Any]]       # {input, lemma, factor}

    # CONFIG AGENT OUTPUT
    config: Optional[Any]                         # RunConfig

    # MODEL AGENT OUTPUT - mesh, edge space, theta0, affine system, N0
    model: Optional[Dict[str, Any]]

    # SWEEP STAGE OUTPUT - Full-Order, Reduced, Oracle or Scaling Agent
    sweep: Optional[Any]                          # Sweep
    tables: Optional[Dict[str, Any]]              # {name: DataFrame}

    # REPORT AGENT OUTPUT
    outputs: Optional[Dict[str, str]]

    # ERROR TRACKING - messages and the matching exit codes
    errors: Annotated[list, operator.add]
    exit_codes: Annotated[list, operator.add]


def _failure(agent: str, e: Exception) -> Dict[str, Any]:
    logger.error(f"{agent} execution failed: {str(e)}")
    return {"errors": [f"{agent}: {str(e)}"], "exit_codes": [exit_code_for(e)]}


def _missing(agent: str, what: str) -> Dict[str, Any]:
    error_msg = f"{agent}: No {what} available"
    logger.error(error_msg)
    return {"errors": [error_msg], "exit_codes": [1]}


def config_agent_node(state: SweepState) -> Dict[str, Any]:
    """
    Execute the Config Agent node.

    Reads the YAML configuration and layers environment and command-line
    overrides on top of it.

    Args:
        state: Current state with config_path and overrides

    Returns:
        Dictionary containing config, or errors if the configuration is invalid
    """
    from agents.config_agent import execute

    logger.info("Executing Config Agent node")

    try:
        result = execute(state)
        logger.info("Config Agent execution completed successfully")
        return result
    except Exception as e:
        return _failure("Config Agent", e)


def model_agent_node(state: SweepState) -> Dict[str, Any]:
    """
    Execute the Model Agent node.

    Builds the mesh, the edge space, the magnetostatic solutions and the
    affine frequency system.

    Args:
        state: Current state containing config

    Returns:
        Dictionary containing model, or errors
    """
    from agents.model_agent import execute

    logger.info("Executing Model Agent node")

    if not state.get("config"):
        return _missing("Model Agent", "config from Config Agent")

    try:
        result = execute(state)
        logger.info("Model Agent execution completed successfully")
        return result
    except Exception as e:
        return _failure("Model Agent", e)


def fullorder_agent_node(state: SweepState) -> Dict[str, Any]:
    """Execute the Full-Order Agent node: one sparse solve per direction and output frequency."""
    from agents.fullorder_agent import execute

    logger.info("Executing Full-Order Agent node")

    if not state.get("model"):
        return _missing("Full-Order Agent", "model from Model Agent")

    try:
        result = execute(state)
        logger.info("Full-Order Agent execution completed successfully")
        return result
    except Exception as e:
        return _failure("Full-Order Agent", e)


def reduced_agent_node(state: SweepState) -> Dict[str, Any]:
    """
    Execute the Reduced Agent node.

    Runs the offline stage (snapshots, truncated SVD, projection, certificate
    data) and the online sweep over the output frequencies.

    Args:
        state: Current state containing config and model

    Returns:
        Dictionary containing sweep and tables, or errors
    """
    from agents.reduced_agent import execute

    logger.info("Executing Reduced Agent node")

    if not state.get("model"):
        return _missing("Reduced Agent", "model from Model Agent")

    try:
        result = execute(state)
        logger.info("Reduced Agent execution completed successfully")
        return result
    except Exception as e:
        return _failure("Reduced Agent", e)


def oracle_agent_node(state: SweepState) -> Dict[str, Any]:
    """Execute the Oracle Agent node: analytic sphere comparison."""
    from agents.oracle_agent import execute

    logger.info("Executing Oracle Agent node")

    if not state.get("model"):
        return _missing("Oracle Agent", "model from Model Agent")

    try:
        result = execute(state)
        logger.info("Oracle Agent execution completed successfully")
        return result
    except Exception as e:
        return _failure("Oracle Agent", e)


def scaling_agent_node(state: SweepState) -> Dict[str, Any]:
    """Execute the Scaling Agent node: rescale a previously written sweep."""
    from agents.scaling_agent import execute

    logger.info("Executing Scaling Agent node")

    if not state.get("scale_request"):
        return _missing("Scaling Agent", "scale request")

    try:
        result = execute(state)
        logger.info("Scaling Agent execution completed successfully")
        return result
    except Exception as e:
        return _failure("Scaling Agent", e)


def report_agent_node(state: SweepState) -> Dict[str, Any]:
    """
    Execute the Report Agent node.

    Writes the sweep CSV, the JSON report and the auxiliary tables.

    Args:
        state: Current state containing sweep and optional tables

    Returns:
        Dictionary containing outputs with the written paths, or errors
    """
    from agents.report_agent import execute

    logger.info("Executing Report Agent node")

    if not state.get("sweep"):
        return _missing("Report Agent", "sweep")

    try:
        result = execute(state)
        logger.info("Report Agent execution completed successfully")
        return result
    except Exception as e:
        return _failure("Report Agent", e)


# ============================================================================
# WORKFLOWS
# ============================================================================

NODES: Dict[str, Callable[[SweepState], Dict[str, Any]]] = {
    "config_agent": config_agent_node,
    "model_agent": model_agent_node,
    "fullorder_agent": fullorder_agent_node,
    "reduced_agent": reduced_agent_node,
    "oracle_agent": oracle_agent_node,
    "scaling_agent": scaling_agent_node,
    "report_agent": report_agent_node,
}

PIPELINES: Dict[str, List[str]] = {
    "sweep-full": ["config_agent", "model_agent", "fullorder_agent", "report_agent"],
    "sweep-pod": ["config_agent", "model_agent", "reduced_agent", "report_agent"],
    "compare-oracle": ["config_agent", "model_agent", "oracle_agent", "report_agent"],
    "scale": ["scaling_agent", "report_agent"],
}


def _continue_or_stop(state: SweepState) -> str:
    # a stage that failed after producing its sweep still gets reported
    return "stop" if state.get("errors") and not state.get("sweep") else "continue"


def create_workflow(command: str):
    """
    Create the compiled workflow of one command.

    Every stage routes to END as soon as an error has been recorded, unless
    a sweep already exists: then the report is still written and the
    recorded exit code is kept.

    Args:
        command: One of sweep-full, sweep-pod, compare-oracle or scale

    Returns:
        Compiled LangGraph application
    """
    if command not in PIPELINES:
        raise ValueError(f"Unknown command: {command}")
    stages = PIPELINES[command]

    workflow = StateGraph(SweepState)
    for name in stages:
        workflow.add_node(name, NODES[name])

    workflow.set_entry_point(stages[0])
    for current, following in zip(stages, stages[1:]):
        workflow.add_conditional_edges(current, _continue_or_stop, {"continue": following, "stop": END})
    workflow.add_edge(stages[-1], END)

    return workflow.compile()


def initial_state(command: str, config_path: Optional[str] = None,
                  overrides: Optional[Dict[str, Any]] = None,
                  scale_request: Optional[Dict[str, Any]] = None) -> SweepState:
    return {
        "command": command,
        "config_path": config_path,
        "overrides": overrides or {},
        "scale_request": scale_request,
        "config": None,
        "model": None,
        "sweep": None,
        "tables": None,
        "outputs": None,
        "errors": [],
        "exit_codes": [],
    }


def run_command(command: str, **kwargs) -> SweepState:
    """Build the workflow for a command and run it to completion."""
    app = create_workflow(command)
    return app.invoke(initial_state(command, **kwargs))


if __name__ == "__main__":
    logging.basicConfig(level=logging.INFO)
    result = run_command("sweep-full", config_path="configs/sphere.yaml", overrides={"outputs": 3})
    print("\n=== Test Execution Results ===")
    print(f"Outputs: {result.get('outputs')}")
    print(f"Errors: {result.get('errors')}")
