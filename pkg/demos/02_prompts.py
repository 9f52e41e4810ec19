"""The five query templates, rendered byte-exactly.

Rendering is a single placeholder substitution with no other edits, so the
same inputs always produce the same bytes.
"""

from kgforge import RelationMode, render_entity_prompt, render_keyword_prompt, render_relation_prompt

print("entity expansion:")
print(" ", render_entity_prompt("Michael Bay").text)

print("\nrelation, one prompt per mode:")
for mode in RelationMode:
    print(f"  {mode.value:<8}", render_relation_prompt("produced by", mode).text)

print("\nkeyword extraction (note the literal double period):")
print(" ", render_keyword_prompt("A film producer.").text)

# Substituted names are never normalized or escaped.
print("\npunctuation survives verbatim:")
print(" ", render_entity_prompt("Transformers: Dark of the Moon").text)
