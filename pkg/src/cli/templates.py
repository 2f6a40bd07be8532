from typing import Dict

from jinja2 import Environment, StrictUndefined, Template

from ..core.models import ExperimentKind

# Base layout shared by every markdown report
BASE_REPORT_TEMPLATE = """# {{ title }}

{% for key, value in metadata.items() %}
- **{{ key }}**: {{ value | cell }}
{% endfor %}

| {{ columns | join(" | ") }} |
|{% for _ in columns %} --- |{% endfor %}

{% for row in rows %}
|{% for column in columns %} {{ row.get(column) | cell }} |{% endfor %}

{% endfor %}
"""

SUMMARY_BLOCK = """
## Summary

{% for key, value in summary.items() %}
- {{ key }}: {{ value | cell }}
{% endfor %}
"""

# Hypothesis sweeps list counterexamples only, so an empty table needs a verdict
HYPOTHESIS_TEMPLATE = BASE_REPORT_TEMPLATE + """
{% if not rows %}
No counterexamples found.
{% else %}
{{ rows | length }} counterexample(s) found.
{% endif %}
""" + SUMMARY_BLOCK

# Report-only comparisons carry their aggregate in the summary
SUMMARY_TEMPLATE = BASE_REPORT_TEMPLATE + SUMMARY_BLOCK

TITLES: Dict[ExperimentKind, str] = {
    ExperimentKind.EPSILON: "Cyclic sequence error bound",
    ExperimentKind.SIMULATE: "Automaton simulation",
    ExperimentKind.TABLE1: "Random versus cyclic sequences",
    ExperimentKind.TABLE2: "Error bound for different generators",
    ExperimentKind.MIN_GEN: "Minimal generators",
    ExperimentKind.HYPOTHESIS: "Cyclic sequence hypothesis sweep",
    ExperimentKind.RANDOM_RATE: "Random sequence success rate",
    ExperimentKind.RANDOM_VS_CYCLIC: "Cyclic versus random comparison",
    ExperimentKind.AZUMA_TAIL: "Tail bound check",
    ExperimentKind.AIKPS_BOUND: "AIKPS exponential sums",
    ExperimentKind.INSTANCE: "Single instance comparison",
    ExperimentKind.STATES: "State counts",
}


def _cell(value) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "yes" if value else "no"
    return str(value)


_env = Environment(trim_blocks=True, lstrip_blocks=True, undefined=StrictUndefined, keep_trailing_newline=True)
_env.filters["cell"] = _cell


def get_template(kind: ExperimentKind) -> Template:
    """Get the markdown template for an experiment kind."""
    if kind is ExperimentKind.HYPOTHESIS:
        return _env.from_string(HYPOTHESIS_TEMPLATE)
    if kind in (ExperimentKind.RANDOM_VS_CYCLIC, ExperimentKind.AZUMA_TAIL, ExperimentKind.INSTANCE):
        return _env.from_string(SUMMARY_TEMPLATE)
    return _env.from_string(BASE_REPORT_TEMPLATE)
