# pixel_eql/explain/prompts.py
"""
Prompt templates for policy and decision explanations.

The public part describes the task, the input variables, the logit formulas
and the action probabilities. The policy prompt adds a step-by-step analysis
request, one turn per action plus a closing summary turn; the decision prompt
adds the values and log-likelihood gradients behind one action.
"""

from __future__ import annotations

import logging
import re
from typing import Optional, Sequence

from jinja2 import Environment, StrictUndefined

from pixel_eql.errors import ContractError
from pixel_eql.explain.grounding import DecisionContext, PolicyDescription, TaskDescription

logger = logging.getLogger(__name__)

_env = Environment(
    autoescape=False,  # nosec - plain-text prompts, not HTML
    trim_blocks=True,
    lstrip_blocks=True,
    keep_trailing_newline=True,
    undefined=StrictUndefined,
)

PUBLIC_TEMPLATE = """\
You need to help a user analyze a control policy for the task {{ task.title }}. The policy was obtained with deep reinforcement learning.
You need to first understand the goal of the task and the policy.


# task Description

{{ task.goal }}

The agent acts in discrete steps. At each step it takes the task screen as input and chooses one of the following actions:

{% for action in task.actions %}
* {{ action.name }}: {{ action.effect }}
{% endfor %}


# The policy

## Input Variable

{{ task.coordinates }}

{{ task.naming }}


## Logits

{% for logit in policy.logits %}
{{ logit.name }} = {{ logit.text }}

{% endfor %}

## The Probability of Actions

{% for formula in policy.probabilities %}
{{ formula }}
{% if not loop.last %}

{% endif %}
{% endfor %}
"""

ANALYSIS_TEMPLATE = """\
# Your Task
You need to analyze this policy based on its mathematical properties. Follow these rules.

1. You may use your own knowledge about the goal of the task, but every conclusion about the policy must rest on its mathematical properties.

2. Analyze the policy in three steps: (a) how changes in the variables affect the action logits, (b) how changes in the logits affect the probability of taking each action, and (c) a summary of how the input variables influence the action probabilities.

3. For (a), remember that each input variable is the location of an object and lies within [0,1]. Pay attention to the coefficient of each input variable and to the constants, if any.

4. For (b), remember that the action probabilities sum to one.

5. Raising the logit of an action tends to raise the probability of that action. Lowering it tends to lower that probability.

6. For (c), summarize your findings from (a) and (b).

For example, for {{ example_logit }}, first consider the coefficient of {{ example_variable }}. Since {{ example_variable }} lies within [0,1], how does it affect {{ example_logit }}? How does it affect the probability of choosing {{ example_action }}?

7. Be specific about the effect of each term.

## Output
{{ output_rules }}

Now, analyze action {{ first_action }}.
"""

OUTPUT_RULES = (
    "Organize your response as (1) equation, (2) influential variables, and (3) analysis. "
    "Render the equations in LaTeX. Use the object names and frame indices as subscripts, "
    "for example y_\\text{agent,1}. Use the action names as subscripts of the logits, "
    "for example logits_\\text{noop}. Only keep {sig} significant digits for each number."
)

SUMMARY_TEMPLATE = """\
Provide a summary of your recent analysis. Follow these rules.
1. Be specific about when the agent chooses each action.
2. Your summary must be consistent with your analysis.
3. Organize your response in markdown format.

Here is a recap of our setup.

{{ public }}"""

DECISION_TEMPLATE = """\
{{ public }}

# Your Task
We used this policy to play the task and collected some data. You need to explain why the agent took a specific action when the input variables took specific values.

The action taken by the agent is {{ context.action }}.
{% for reading in context.readings %}
The value of {{ reading.name }} is {{ reading.value_text }}
The gradient of the log-likelihood for action {{ context.action }} with respect to {{ reading.name }} is {{ reading.gradient_text }}.
{% endfor %}

## Output

You need to provide a concise explanation of why the agent took this action when the input variables took these values.
For example, {{ task.example_question }}

Follow these rules.
1. Be specific: explain why the action {{ context.action }} is preferred over the other actions.
2. Keep the explanation easy to read.
3. Base the explanation entirely on the equations of the policy, the values of the input variables, and the gradients of the action log-likelihood with respect to the input variables.
4. Keep the explanation consistent with the definition of the input variables and the coordinate system.

{{ output_rules }}
"""


def _output_rules(policy: PolicyDescription) -> str:
    return OUTPUT_RULES.replace("{sig}", str(policy.sig_digits))


def render_public_prompt(task: TaskDescription, policy: PolicyDescription) -> str:
    """Task, input variables, logits and probability formulas, without a trailing newline."""
    return _env.from_string(PUBLIC_TEMPLATE).render(task=task, policy=policy).rstrip("\n")


def _example_variable(policy: PolicyDescription, logit_name: str) -> str:
    for logit in policy.logits:
        if logit.name == logit_name:
            for variable in policy.variables:
                if re.search(rf"(?<![\w]){re.escape(variable)}(?![\w])", logit.text):
                    return variable
    return policy.variables[0] if policy.variables else "x_agent_1"


def render_policy_prompt(
    task: TaskDescription,
    policy: PolicyDescription,
    actions: Optional[Sequence[str]] = None,
) -> list[str]:
    """
    The user turns of a policy-analysis dialogue.

    The first turn carries the public prompt, the analysis rules and a request
    for the first action; each further action gets a short turn of its own, and
    the last turn asks for a summary with a recap of the public prompt.

    Raises:
        ContractError: if an action is not one of the policy's actions.
    """
    order = list(actions) if actions is not None else list(policy.actions)
    unknown = [a for a in order if a not in policy.actions]
    if unknown or not order:
        raise ContractError(f"Unknown action(s) {unknown or order} for actions {policy.actions}")

    public = render_public_prompt(task, policy)
    example_action = policy.actions[1] if len(policy.actions) > 1 else policy.actions[0]
    example_logit = f"logits_{example_action}1"
    analysis = _env.from_string(ANALYSIS_TEMPLATE).render(
        example_logit=example_logit,
        example_variable=_example_variable(policy, example_logit),
        example_action=example_action,
        output_rules=_output_rules(policy),
        first_action=order[0],
    )
    turns = [public + "\n\n" + analysis.rstrip("\n")]
    turns += [f"Analyze action {a}." for a in order[1:]]
    turns.append(_env.from_string(SUMMARY_TEMPLATE).render(public=public))
    return turns


def render_decision_prompt(
    task: TaskDescription, policy: PolicyDescription, context: DecisionContext
) -> str:
    """
    Public prompt followed by one value line and one gradient line per variable.

    Raises:
        ContractError: if the context's action is not one of the policy's actions.
    """
    if context.action not in policy.actions:
        raise ContractError(f"Unknown action {context.action!r}")
    return _env.from_string(DECISION_TEMPLATE).render(
        public=render_public_prompt(task, policy),
        task=task,
        context=context,
        output_rules=_output_rules(policy),
    )
