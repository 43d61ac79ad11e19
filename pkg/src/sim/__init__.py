# Synthetic digit logits and training curves
