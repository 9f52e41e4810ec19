"""Relation text enrichment: global/local/reverse explanations composed onto names.

Each requested mode yields one generated explanation per relation. Composition
appends the texts to the relation name in the canonical order global, local,
reverse, joined by the literal separator token ``[SEP]``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Mapping

from .bundle import AuditItem, AugmentationBundle
from .gateway import GatewayError, LlmGateway, prompt_key
from .kg import KnowledgeGraph, kg_fingerprint
from .templates import MODE_ORDER, RelationMode, render_relation_prompt

SEPARATOR = "[SEP]"
_ESCAPED = "[SEP ]"


@dataclass(frozen=True)
class RelationAugmentation:
    relation: str
    texts: tuple[tuple[RelationMode, str], ...]
    composed: str

    def text_for(self, mode: RelationMode) -> str | None:
        for m, text in self.texts:
            if m == mode:
                return text
        return None


def escape_separator(text: str) -> str:
    """Neutralize literal separator tokens inside generated text.

    Keeps the composed export unambiguous: splitting on `` [SEP] `` always
    recovers the original parts.
    """
    return text.replace(SEPARATOR, _ESCAPED)


def compose_relation_text(name: str, texts: Iterable[tuple[RelationMode, str]]) -> str:
    """Relation name followed by its mode texts, ``[SEP]``-joined in canonical order.

    Mode texts are whitespace-normalized to a single line; empty texts and
    absent modes are skipped. With no texts the name is returned unchanged.
    """
    by_mode: dict[RelationMode, str] = {}
    for mode, text in texts:
        mode = RelationMode(mode)
        if mode in by_mode:
            raise ValueError(f"duplicate text for mode {mode.value!r}")
        by_mode[mode] = text
    parts = []
    for mode in MODE_ORDER:
        if mode not in by_mode:
            continue
        normalized = " ".join(escape_separator(by_mode[mode]).split())
        if normalized:
            parts.append(normalized)
    if not parts:
        return name
    return name + " " + f" {SEPARATOR} ".join(parts)


def describe_relations(
    kg: KnowledgeGraph,
    gateway: LlmGateway,
    modes: Iterable[RelationMode | str],
) -> AugmentationBundle:
    """Generate explanations for every relation in every requested mode.

    Failures are captured per (relation, mode); a relation with partial
    failures is still composed from whichever mode texts succeeded.
    """
    mode_set = {RelationMode(m) for m in modes}
    if not mode_set:
        raise ValueError("modes must be a non-empty subset of {global, local, reverse}")
    ordered_modes = [m for m in MODE_ORDER if m in mode_set]

    relations = list(kg.texts.relation_name)
    jobs = [(relation, mode) for relation in relations for mode in ordered_modes]
    prompts = [
        render_relation_prompt(kg.texts.relation_name[relation], mode, subject_id=relation)
        for relation, mode in jobs
    ]
    results = gateway.batch_query(prompts)

    bundle = AugmentationBundle(kind="relation", fingerprint=kg_fingerprint(kg))
    texts_by_relation: dict[str, list[tuple[RelationMode, str]]] = {r: [] for r in relations}
    for (relation, mode), prompt, result in zip(jobs, prompts, results):
        if isinstance(result, GatewayError):
            bundle.items.append(
                AuditItem(
                    subject=relation,
                    mode=mode.value,
                    prompt_hash=prompt_key(prompt.text, gateway.params),
                    error=str(result),
                )
            )
            continue
        texts_by_relation[relation].append((mode, result.response))
        bundle.items.append(
            AuditItem(
                subject=relation, mode=mode.value, prompt_hash=result.key, response=result.response
            )
        )
    for relation in relations:
        texts = texts_by_relation[relation]
        if not texts:
            continue
        bundle.relation_text[relation] = compose_relation_text(
            kg.texts.relation_name[relation], texts
        )
    return bundle


def relation_augmentations(
    bundle: AugmentationBundle, relation_names: Mapping[str, str]
) -> list[RelationAugmentation]:
    """Reconstruct per-relation records (mode texts plus composed form) from a bundle."""
    if bundle.kind != "relation":
        raise ValueError(f"expected a relation bundle, got kind {bundle.kind!r}")
    texts: dict[str, list[tuple[RelationMode, str]]] = {}
    for item in bundle.items:
        if item.error is None and item.mode is not None:
            texts.setdefault(item.subject, []).append((RelationMode(item.mode), item.response or ""))
    return [
        RelationAugmentation(
            relation=relation,
            texts=tuple(sorted(pairs, key=lambda p: MODE_ORDER.index(p[0]))),
            composed=bundle.relation_text.get(
                relation, relation_names.get(relation, relation)
            ),
        )
        for relation, pairs in texts.items()
    ]
