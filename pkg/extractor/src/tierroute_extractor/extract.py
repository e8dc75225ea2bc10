"""Fine-tune a multi-exit encoder and emit a trace file.

The run trains the backbone with the summed cross-entropy of the three exit
classifiers.  After every epoch the mobile exit's probability of each
validation sample's true label is recorded; those per-epoch vectors are what
the routing side turns into confidence/variability statistics.  A small grid
over batch size and learning rate is searched, scoring each combination by
its best validation accuracy at the final exit; the winning combination's
best epoch becomes the reference checkpoint used to record per-tier
confidence and correctness for the validation and test splits.  Embeddings
are the checkpoint's token-embedding outputs, mean-pooled to one vector per
sample.
"""
from __future__ import annotations

import copy
import logging
from dataclasses import dataclass

import numpy as np
import torch

from .config import ExtractorConfig, ExtractorError
from .data import load_dataset, split_indices
from .model import MultiExitEncoder, joint_loss, load_checkpoint, save_checkpoint
from .traceio import TIERS, check_trace_file, make_header, make_record, write_trace_file

logger = logging.getLogger(__name__)


@dataclass
class RunOutcome:
    batch_size: int
    lr: float
    epoch_probs: np.ndarray          # (E, n_validation) true-label probs, mobile exit
    best_state: dict
    best_epoch: int
    best_val_acc: float


@dataclass
class ExtractSummary:
    traces: str
    n_records: int
    D: int
    E: int
    num_classes: int
    batch_size: int
    lr: float
    best_epoch: int
    best_val_acc: float
    split_sizes: dict[str, int]


def _build_model(cfg: ExtractorConfig, in_features: int, seq_len: int,
                 num_classes: int) -> MultiExitEncoder:
    if cfg.backbone == "tiny-encoder":
        return MultiExitEncoder(in_features=in_features, seq_len=seq_len,
                                num_classes=num_classes, exits=(cfg.m, cfg.n, cfg.l),
                                d_model=cfg.d_model, num_heads=cfg.num_heads,
                                dropout=cfg.dropout)
    if cfg.backbone.startswith("checkpoint:"):
        model = load_checkpoint(cfg.backbone.split(":", 1)[1])
        if tuple(model.exits) != (cfg.m, cfg.n, cfg.l):
            raise ExtractorError(
                f"checkpoint exits {model.exits} do not match config "
                f"(m={cfg.m}, n={cfg.n}, l={cfg.l})")
        if model.hparams["num_classes"] != num_classes:
            raise ExtractorError("checkpoint class count does not match the dataset")
        return model
    raise ExtractorError(f"unknown backbone {cfg.backbone!r} "
                         "(use 'tiny-encoder' or 'checkpoint:<path>')")


@torch.no_grad()
def _exit_probs(model: MultiExitEncoder, X: torch.Tensor,
                batch: int = 512) -> dict[int, torch.Tensor]:
    model.eval()
    chunks: dict[int, list[torch.Tensor]] = {e: [] for e in set(model.exits)}
    for i in range(0, len(X), batch):
        logits = model(X[i:i + batch])
        for e in chunks:
            chunks[e].append(torch.softmax(logits[e], dim=1))
    return {e: torch.cat(parts) for e, parts in chunks.items()}


def _train_one(cfg: ExtractorConfig, X: torch.Tensor, y: torch.Tensor,
               splits: dict[str, np.ndarray], batch_size: int, lr: float,
               seed: int) -> RunOutcome:
    torch.manual_seed(seed)
    model = _build_model(cfg, X.shape[2], X.shape[1], int(y.max()) + 1)
    optimizer = torch.optim.Adam(model.parameters(), lr=lr)
    rng = np.random.default_rng(seed)
    train_idx = splits["train"]
    val_idx = splits["validation"]
    X_val, y_val = X[val_idx], y[val_idx]
    epoch_probs = np.zeros((cfg.epochs, len(val_idx)))
    best_state, best_epoch, best_acc = None, -1, -1.0
    for epoch in range(cfg.epochs):
        model.train()
        order = rng.permutation(len(train_idx))
        for start in range(0, len(order), batch_size):
            batch = train_idx[order[start:start + batch_size]]
            optimizer.zero_grad()
            logits = model(X[batch])
            loss = joint_loss(logits, y[batch], model.exits)
            loss.backward()
            optimizer.step()
        probs = _exit_probs(model, X_val)
        mobile = probs[cfg.m]
        epoch_probs[epoch] = mobile[torch.arange(len(val_idx)), y_val].numpy()
        val_acc = float((probs[cfg.l].argmax(dim=1) == y_val).float().mean())
        logger.info("bs=%d lr=%g epoch %d: val acc %.4f", batch_size, lr,
                    epoch + 1, val_acc)
        # checkpoint selection: keep the epoch with the best final-exit
        # validation accuracy (training still runs all epochs so every
        # per-epoch probability is recorded)
        if val_acc > best_acc:
            best_acc = val_acc
            best_epoch = epoch
            best_state = copy.deepcopy(model.state_dict())
    return RunOutcome(batch_size=batch_size, lr=lr, epoch_probs=epoch_probs,
                      best_state=best_state, best_epoch=best_epoch,
                      best_val_acc=best_acc)


def extract(cfg: ExtractorConfig) -> ExtractSummary:
    """Run the full pipeline and write a validated trace file."""
    cfg.validate()
    X_np, y_np, num_classes = load_dataset(cfg.dataset, cfg.max_samples, cfg.seed)
    X = torch.from_numpy(X_np).float()
    y = torch.from_numpy(y_np).long()
    splits = split_indices(len(X), cfg.split_fractions, cfg.seed)
    if len(splits["validation"]) == 0 or len(splits["test"]) == 0:
        raise ExtractorError("validation and test splits must be non-empty")

    best: RunOutcome | None = None
    for i, batch_size in enumerate(cfg.batch_sizes):
        for j, lr in enumerate(cfg.learning_rates):
            outcome = _train_one(cfg, X, y, splits, batch_size, lr,
                                 seed=cfg.seed + 1000 * i + j)
            if best is None or outcome.best_val_acc > best.best_val_acc:
                best = outcome
    assert best is not None
    logger.info("selected bs=%d lr=%g (best epoch %d, val acc %.4f)",
                best.batch_size, best.lr, best.best_epoch + 1, best.best_val_acc)

    model = _build_model(cfg, X.shape[2], X.shape[1], num_classes)
    model.load_state_dict(best.best_state)
    model.eval()
    if cfg.checkpoint_out is not None:
        save_checkpoint(model, cfg.checkpoint_out)

    records = []
    val_pos = {int(idx): pos for pos, idx in enumerate(splits["validation"])}
    for split in ("validation", "test"):
        idx = torch.from_numpy(splits[split])
        X_s, y_s = X[idx], y[idx]
        with torch.no_grad():
            embeddings = model.pooled_embedding(X_s).numpy()
        probs = _exit_probs(model, X_s)
        conf = {}
        correct = {}
        for tier, depth in zip(TIERS, (cfg.m, cfg.n, cfg.l)):
            p = probs[depth]
            conf[tier] = p.max(dim=1).values.numpy()
            correct[tier] = (p.argmax(dim=1) == y_s).numpy()
        for row, ds_index in enumerate(splits[split]):
            if split == "validation":
                epoch_probs = best.epoch_probs[:, val_pos[int(ds_index)]]
            else:
                epoch_probs = None
            records.append(make_record(
                rec_id=f"{split}-{int(ds_index):05d}", split=split,
                embedding=embeddings[row], epoch_true_probs=epoch_probs,
                tier_conf={t: conf[t][row] for t in TIERS},
                tier_correct={t: bool(correct[t][row]) for t in TIERS},
                label=int(y_s[row])))

    note = (cfg.note or f"extracted from {cfg.dataset} with {cfg.backbone} "
                        f"(exits {cfg.m}/{cfg.n}/{cfg.l}; per-tier stats from the "
                        f"best validation checkpoint)")
    header = make_header(D=cfg.d_model, E=cfg.epochs, num_classes=num_classes,
                         seed=cfg.seed, note=note)
    cfg.traces.parent.mkdir(parents=True, exist_ok=True)
    write_trace_file(cfg.traces, header, records)
    check_trace_file(cfg.traces)
    return ExtractSummary(
        traces=str(cfg.traces), n_records=len(records), D=cfg.d_model,
        E=cfg.epochs, num_classes=num_classes, batch_size=best.batch_size,
        lr=best.lr, best_epoch=best.best_epoch + 1, best_val_acc=best.best_val_acc,
        split_sizes={s: len(splits[s]) for s in splits})


def pool_floor_search(mu: np.ndarray, sigma: np.ndarray, alphas, betas,
                      min_frac: float) -> tuple[tuple[float, float] | None, dict]:
    """Scan a threshold grid for a pair where every pool holds at least
    min_frac of the samples; None means the grid is exhausted."""
    best_pair, best_props = None, {}
    for a in alphas:
        for b in betas:
            easy = float(np.mean((mu >= a) & (sigma <= b)))
            medium = float(np.mean((mu >= a) & (sigma > b)))
            hard = float(np.mean(mu < a))
            if min(easy, medium, hard) >= min_frac:
                return (a, b), {"easy": easy, "medium": medium, "hard": hard}
            if not best_props or min(easy, medium, hard) > min(best_props.values()):
                best_pair, best_props = None, {"easy": easy, "medium": medium,
                                               "hard": hard}
    return None, best_props
