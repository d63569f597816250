"""Adversarial and reconstruction objectives.

Both GAN terms are written in softplus form, which is the numerically stable
way to evaluate binary cross-entropy on raw logits: softplus(-d) is the loss
for calling a sample real, softplus(d) for calling it fake.  The generator
uses the non-saturating variant (push logits of fakes up) rather than the
minimax one, so its gradient does not vanish when the discriminator wins.
"""

import torch.nn.functional as F


def reconstruction_loss(output, target):
    """Mean squared error over every element of the batch."""
    return F.mse_loss(output, target)


def discriminator_loss(real_logits, fake_logits):
    """Real scored as real plus fake scored as fake; 2*ln(2) at zero logits."""
    return F.softplus(-real_logits).mean() + F.softplus(fake_logits).mean()


def generator_adversarial_loss(fake_logits):
    """Non-saturating generator term: fake scored as real; ln(2) at zero logits."""
    return F.softplus(-fake_logits).mean()
