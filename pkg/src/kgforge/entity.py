"""Entity description expansion: fetch richer text and merge it under a token budget.

The generated text is appended after the original description (never replaces
it) and the result is cut to a whitespace-token budget. The budget is an
approximation of downstream encoder limits, configurable per dataset: 70
tokens suits Freebase-style graphs, 50 WordNet-style ones.
"""

from __future__ import annotations

from dataclasses import dataclass

from .bundle import AuditItem, AugmentationBundle
from .gateway import GatewayError, LlmGateway, prompt_key
from .kg import KnowledgeGraph, kg_fingerprint
from .templates import render_entity_prompt

DEFAULT_BUDGET_TOKENS = 70

EMPTY_GENERATION_FLAG = "empty generation"


@dataclass(frozen=True)
class EntityAugmentation:
    entity: str
    generated: str
    merged: str
    budget_tokens: int


def token_count(text: str) -> int:
    """Whitespace-token count used by the merge budget."""
    return len(text.split())


def merge_entity_text(original: str, generated: str, budget_tokens: int) -> str:
    """Append generated text to the original, truncated to ``budget_tokens`` tokens.

    The original is preserved byte-for-byte whenever it fits the budget; only
    the appended portion is whitespace-normalized (it must stay single-line
    for the tab-separated export). When the original alone exceeds the budget
    it is cut to the first ``budget_tokens`` tokens.
    """
    if budget_tokens < 1:
        raise ValueError(f"budget_tokens must be >= 1, got {budget_tokens}")
    original_tokens = original.split()
    if len(original_tokens) >= budget_tokens:
        return " ".join(original_tokens[:budget_tokens])
    appended = " ".join(generated.split()[: budget_tokens - len(original_tokens)])
    if not original:
        return appended
    if not appended:
        return original
    return original + " " + appended


def expand_descriptions(
    kg: KnowledgeGraph,
    gateway: LlmGateway,
    budget_tokens: int = DEFAULT_BUDGET_TOKENS,
) -> AugmentationBundle:
    """Expand every entity's description through the gateway.

    Failures are recorded per entity in the bundle's audit items and never
    abort the run. Entities whose generation failed keep no replacement text,
    so composition leaves their original description untouched. Raw responses
    are preserved verbatim in the audit trail.
    """
    entities = list(kg.texts.entity_name)
    prompts = [
        render_entity_prompt(kg.texts.name_of(entity), subject_id=entity) for entity in entities
    ]
    results = gateway.batch_query(prompts)

    bundle = AugmentationBundle(kind="entity", fingerprint=kg_fingerprint(kg))
    for entity, prompt, result in zip(entities, prompts, results):
        original = kg.texts.desc_of(entity)
        if isinstance(result, GatewayError):
            bundle.items.append(
                AuditItem(
                    subject=entity,
                    prompt_hash=prompt_key(prompt.text, gateway.params),
                    error=str(result),
                )
            )
            continue
        generated = result.response
        flags: tuple[str, ...] = ()
        if not generated.strip():
            merged = original
            flags = (EMPTY_GENERATION_FLAG,)
        else:
            merged = merge_entity_text(original, generated, budget_tokens)
        bundle.entity_text[entity] = merged
        bundle.items.append(
            AuditItem(subject=entity, prompt_hash=result.key, response=generated, flags=flags)
        )
    return bundle


def entity_augmentations(
    bundle: AugmentationBundle, budget_tokens: int = DEFAULT_BUDGET_TOKENS
) -> list[EntityAugmentation]:
    """Reconstruct per-entity augmentation records from an entity bundle."""
    if bundle.kind != "entity":
        raise ValueError(f"expected an entity bundle, got kind {bundle.kind!r}")
    responses = {item.subject: item.response or "" for item in bundle.items if item.error is None}
    return [
        EntityAugmentation(
            entity=entity,
            generated=responses.get(entity, ""),
            merged=merged,
            budget_tokens=budget_tokens,
        )
        for entity, merged in bundle.entity_text.items()
    ]
