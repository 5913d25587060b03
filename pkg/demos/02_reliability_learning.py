"""
Learning a filter together with fragment reliabilities
======================================================

A pattern is split into a left and a right fragment.  In every training
sample the right half is replaced by fresh noise, so only the left half
predicts the label.  The learner should give the left fragment the larger
weight.
"""
import numpy as np

from drtrack import (LearnConfig, TrainingSet, joint_learn, make_gaussian_label,
                     make_patch_masks, objective_value)

rng = np.random.default_rng(0)
label = make_gaussian_label(8, 8, 4, 4)
masks = make_patch_masks(8, 8, 4, 4, grid=(1, 2))
base = rng.standard_normal((8, 8))

samples = []
for _ in range(6):
    x = base.copy()
    x[masks.masks[1]] = rng.standard_normal(masks.masks[1].sum())
    samples.append(x[None])
ts = TrainingSet(np.stack(samples), np.full(6, 1 / 6), label)

# default learner: weights in [0.5, 1.5] with mean one
history = []
cfg = LearnConfig(alternations=4)
h, beta = joint_learn(ts, masks, None, np.ones(2), cfg, history)
print("weights (left, right):", beta.round(3))
print("objective per half-step:", np.round(history, 4))

# the data term only sees beta * h, so scaling h down and beta up is free
# while the penalties on h shrink; with only the box the weights saturate
h_box, beta_box = joint_learn(ts, masks, None, np.ones(2), LearnConfig(alternations=4, fix_mean=False))
print("box-only weights:", beta_box.round(3))
print("objective, mean-one vs box-only: %.4f vs %.4f"
      % (objective_value(h, beta, ts, masks, cfg), objective_value(h_box, beta_box, ts, masks, cfg)))
