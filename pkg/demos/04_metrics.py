"""Evaluation metrics tour
=========================

The three evaluation dimensions: content preservation (r-sBLEU against
references, s-sBLEU against the sources), transfer strength (classifier
accuracy), and fluency (token-level perplexity). Plus sentence GLEU for
error correction and exact string match for the symbolic task.
"""

from restyle import (
    BackendEndpoints,
    classifier_accuracy,
    corpus_bleu,
    corpus_perplexity,
    exact_match_accuracy,
    self_sbleu,
    sentence_gleu,
    tokenize_eval,
)

# Evaluation tokenization: lowercase, punctuation split off, whitespace split.
print("tokenize:", tokenize_eval("Hello, world!"))

# Corpus BLEU-4 with its sufficient statistics.
hyps = ["the cat sat on the mat", "a big dog ran"]
refs = ["the cat sat on a mat", "the big dog ran fast"]
report = corpus_bleu(hyps, refs)
print(f"\nBLEU score={report.score:.2f} "
      f"precisions={[round(p, 3) for p in report.ngram_precisions]} "
      f"bp={report.brevity_penalty:.3f} "
      f"lens={report.hyp_len}/{report.ref_len}")

# s-sBLEU flags copying: outputs identical to the sources score 100.
sources = ["good food", "nice view"]
print("s-sBLEU of verbatim copies:", self_sbleu(sources, sources))

# Sentence GLEU rewards corrections and penalizes keeping source errors.
src, ref = "the cat sit on mat", "the cat sat on the mat"
for hyp in (src, ref, "the cat sit on the mat"):
    print(f"GLEU(hyp={hyp!r}) = {sentence_gleu(src, hyp, ref):.4f}")

# Token-level perplexity from a scoring backend. Under a uniform
# distribution over V tokens the corpus perplexity is exactly V.
uniform = BackendEndpoints(score="mock://uniform?vocab=50257")
print("\nuniform PPL:", corpus_perplexity(["any text here", "short"], uniform))

# Classifier accuracy over a /fill_mask-shaped endpoint.
sentiment = BackendEndpoints(fill_mask="mock://sentiment")
outputs = ["bad food", "rude staff", "good food"]
targets = ["negative", "negative", "negative"]
acc = classifier_accuracy(outputs, targets, sentiment,
                          labels=["positive", "negative"])
print(f"classifier accuracy: {acc:.2f}  (the unflipped copy misses)")

# Exact match, whitespace-trimmed.
print("exact match:", exact_match_accuracy(["a ", "b", "c"], ["a", "b", "x"]))
