# pixel_eql/reporting.py
from __future__ import annotations

import logging
import math
from pathlib import Path
from typing import Any, Dict, List, Optional

import jinja2
from rich.console import Console
from rich.table import Table

from pixel_eql.models import CommandSummary, GradCheckRow

logger = logging.getLogger(__name__)

METRIC_DESCRIPTIONS = {
    "n_samples": "Samples in the dataset",
    "n_train": "Training split size",
    "n_test": "Test split size",
    "test_mae": "Test coordinate MAE",
    "test_exist_accuracy": "Test existence accuracy",
    "test_loss": "Test perception loss",
    "mae_before": "Test MAE before policy learning",
    "mae_after": "Test MAE after policy learning",
    "f_mae": "F-MAE on relevant objects (last rollout)",
    "mean_return": "Mean episode return",
    "std_return": "Std of episode return",
    "final_loss_ng": "Final guidance loss (nats)",
    "final_lambda_reg": "Final sparsity weight",
    "episodes": "Episodes",
    "steps": "Environment steps",
    "n_terms": "Nonzero terms over all logits",
    "n_relevant_variables": "Variables used by the policy",
    "n_prompts": "Prompts rendered",
    "max_rel_error": "Worst gradient relative error",
}

# ---------------- helpers ----------------


def _fmt(value: Optional[float]) -> str:
    if value is None or (isinstance(value, float) and math.isnan(value)):
        return "n/a"
    if float(value).is_integer() and abs(value) < 1e15:
        return str(int(value))
    return f"{value:.6g}"


def _metric_rows(summary: CommandSummary) -> List[Dict[str, Any]]:
    return [
        {"name": name, "description": METRIC_DESCRIPTIONS.get(name, name), "value": _fmt(value)}
        for name, value in summary.metrics.items()
    ]


# ---------------- terminal ----------------


def print_summary(summary: CommandSummary, console: Optional[Console] = None) -> None:
    """Metrics and artifacts of one subcommand as rich tables."""
    console = console or Console()
    title = f"[bold cyan]{summary.command}[/bold cyan] on {summary.env_id}"
    if summary.variant:
        title += f" ({summary.variant})"

    if summary.metrics:
        table = Table(title=title)
        table.add_column("Metric", style="bold white")
        table.add_column("Value", justify="right")
        for row in _metric_rows(summary):
            table.add_row(row["description"], row["value"])
        console.print(table)
    if summary.grad_checks:
        print_grad_checks(summary.grad_checks, console)
    for name, path in summary.artifacts.items():
        console.print(f"[dim]{name}:[/dim] {path}")
    for note in summary.notes:
        console.print(f"[yellow]{note}[/yellow]")


def print_grad_checks(rows: List[GradCheckRow], console: Optional[Console] = None) -> None:
    console = console or Console()
    table = Table(title="Analytic vs. finite-difference gradients", show_lines=True)
    table.add_column("Objective", style="bold white")
    table.add_column("Instances", justify="right")
    table.add_column("Max rel. error", justify="right")
    table.add_column("Status", justify="center")
    for row in rows:
        status = "[bold green]OK[/bold green]" if row.passed else "[bold red]X[/bold red]"
        table.add_row(row.name, str(row.instances), f"{row.max_rel_error:.3e}", status)
    console.print(table)


# ---------------- files ----------------

_DEFAULT_MD_TEMPLATE = """# pixel-eql {{ summary.command }}

**Environment:** `{{ summary.env_id }}`{% if summary.variant %}  
**Variant:** `{{ summary.variant }}`{% endif %}  
**Seed:** {{ summary.seed }}

{% if metrics %}
## Metrics

| Metric | Value |
|---|---:|
{% for m in metrics -%}
| {{ m.description }} | {{ m.value }} |
{% endfor %}
{% endif %}
{% if summary.grad_checks %}
## Gradient checks

| Objective | Instances | Max rel. error | Status |
|---|---:|---:|:---:|
{% for r in summary.grad_checks -%}
| `{{ r.name }}` | {{ r.instances }} | {{ "%.3e"|format(r.max_rel_error) }} | {{ "OK" if r.passed else "FAIL" }} |
{% endfor %}
{% endif %}
{% if summary.artifacts %}
## Artifacts

{% for name, path in summary.artifacts.items() -%}
- **{{ name }}**: `{{ path }}`
{% endfor %}
{% endif %}
{% if summary.notes %}
## Notes

{% for note in summary.notes -%}
- {{ note }}
{% endfor %}
{% endif %}
"""


def render_markdown(summary: CommandSummary, template: Optional[str] = None) -> str:
    """Human-readable report. Timestamps are left to the JSON metadata block."""
    env = jinja2.Environment(autoescape=False, trim_blocks=True, lstrip_blocks=True)
    tmpl = env.from_string(template or _DEFAULT_MD_TEMPLATE)
    return tmpl.render(summary=summary, metrics=_metric_rows(summary)).rstrip() + "\n"


def render_json(summary: CommandSummary) -> str:
    return summary.model_dump_json(indent=2) + "\n"


def write_summary(summary: CommandSummary, out_dir: Path) -> tuple[Path, Path]:
    """Write ``summary-<command>.json`` and ``report-<command>.md`` into ``out_dir``."""
    json_path = out_dir / f"summary-{summary.command}.json"
    md_path = out_dir / f"report-{summary.command}.md"
    out_dir.mkdir(parents=True, exist_ok=True)
    json_path.write_text(render_json(summary), encoding="utf-8")
    md_path.write_text(render_markdown(summary), encoding="utf-8")
    logger.info("Wrote %s and %s", json_path, md_path)
    return json_path, md_path
