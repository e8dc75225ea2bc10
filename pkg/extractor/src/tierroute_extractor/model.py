"""A small transformer encoder with classifiers at intermediate layers.

The first m layers stand in for the mobile deployment, the first n for the
edge, and all l layers for the cloud; a linear head after each of those
depths maps the mean-pooled hidden state to class logits.  The token
embedding layer (input projection plus learned positions) is what a mobile
device would run to describe a sample without classifying it.
"""
from __future__ import annotations

import torch
from torch import nn

from .config import ExtractorError


class MultiExitEncoder(nn.Module):
    def __init__(self, in_features: int, seq_len: int, num_classes: int,
                 exits: tuple[int, int, int], d_model: int = 32,
                 num_heads: int = 4, dropout: float = 0.1):
        super().__init__()
        m, n, l = exits
        if not 1 <= m <= n <= l:
            raise ExtractorError(f"exits must satisfy 1 <= m <= n <= l, got {exits}")
        self.exits = (m, n, l)
        self.hparams = {"in_features": in_features, "seq_len": seq_len,
                        "num_classes": num_classes, "exits": list(exits),
                        "d_model": d_model, "num_heads": num_heads, "dropout": dropout}
        self.input_proj = nn.Linear(in_features, d_model)
        self.positions = nn.Parameter(torch.zeros(seq_len, d_model))
        self.blocks = nn.ModuleList([
            nn.TransformerEncoderLayer(d_model, num_heads, dim_feedforward=4 * d_model,
                                       dropout=dropout, batch_first=True)
            for _ in range(l)
        ])
        self.heads = nn.ModuleDict({str(e): nn.Linear(d_model, num_classes)
                                    for e in sorted(set(exits))})

    def embed(self, x: torch.Tensor) -> torch.Tensor:
        """Embedding-layer output: (batch, seq_len, d_model)."""
        return self.input_proj(x) + self.positions

    def pooled_embedding(self, x: torch.Tensor) -> torch.Tensor:
        """One d_model vector per sample: token embeddings mean-pooled."""
        return self.embed(x).mean(dim=1)

    def forward(self, x: torch.Tensor) -> dict[int, torch.Tensor]:
        """Class logits at each exit depth, keyed by layer index."""
        h = self.embed(x)
        logits: dict[int, torch.Tensor] = {}
        for depth, block in enumerate(self.blocks, start=1):
            h = block(h)
            if str(depth) in self.heads and depth in self.exits:
                logits[depth] = self.heads[str(depth)](h.mean(dim=1))
        return logits


def joint_loss(logits: dict[int, torch.Tensor], target: torch.Tensor,
               exits: tuple[int, int, int]) -> torch.Tensor:
    """Sum of the three exit classifiers' cross-entropy losses."""
    ce = nn.functional.cross_entropy
    loss = ce(logits[exits[0]], target)
    for depth in exits[1:]:
        loss = loss + ce(logits[depth], target)
    return loss


def save_checkpoint(model: MultiExitEncoder, path) -> None:
    torch.save({"hparams": model.hparams, "state_dict": model.state_dict()}, path)


def load_checkpoint(path) -> MultiExitEncoder:
    try:
        payload = torch.load(path, map_location="cpu", weights_only=True)
    except FileNotFoundError:
        raise ExtractorError(f"backbone checkpoint not found: {path}")
    hp = payload["hparams"]
    model = MultiExitEncoder(in_features=hp["in_features"], seq_len=hp["seq_len"],
                             num_classes=hp["num_classes"], exits=tuple(hp["exits"]),
                             d_model=hp["d_model"], num_heads=hp["num_heads"],
                             dropout=hp["dropout"])
    model.load_state_dict(payload["state_dict"])
    return model
