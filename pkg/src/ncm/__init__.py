# Expectation-based continuity metrics over digit logits
