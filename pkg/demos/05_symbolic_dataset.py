"""Symbolic comparison dataset
=============================

A synthetic style transfer task with a checkable answer: each source is
"a > b" or "a < b" over animal/color/fruit/number words, and the target is
the spoken English sentence. Because verbalization is a bijection, transfer
quality reduces to exact string match.
"""

from restyle import (
    SymbSpec,
    exact_match_accuracy,
    generate_symb,
    parse_comparison,
    verbalize_comparison,
)

# Seeded generation is reproducible and the word pairs are always distinct.
records = generate_symb(SymbSpec(n=1000, seed=7))
print("records:", len(records))
for record in records[:5]:
    print(f"  {record.id}: {record.source!r:22} -> {record.reference!r}")

# The grammar round-trips exactly.
sample = records[0].source
english = verbalize_comparison(sample)
print("\nround trip:", sample, "->", english, "->", parse_comparison(english))
assert all(parse_comparison(r.reference) == r.source for r in records)

# A perfect transfer scores exact-match 1.0; a corruptor that damages a
# deterministic 26% of outputs lands at exactly 0.74.
references = [r.reference for r in records]
print("\nperfect transfer accuracy:",
      exact_match_accuracy(list(references), references))
corrupted = [ref + " indeed" if i % 100 < 26 else ref
             for i, ref in enumerate(references)]
print("26%-corrupted accuracy:   ",
      exact_match_accuracy(corrupted, references))

# Same seed, same dataset; different seed, different dataset.
again = generate_symb(SymbSpec(n=1000, seed=7))
other = generate_symb(SymbSpec(n=1000, seed=8))
print("\nseed 7 == seed 7:", records == again)
print("seed 7 == seed 8:", records == other)
