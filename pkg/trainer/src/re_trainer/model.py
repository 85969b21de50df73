"""Marker-state relation classifier.

A transformer encoder runs over the marked token sequence; the hidden
states at the two opening marker positions are concatenated (2 x hidden)
and a linear head maps them to the 10 relation scores.
"""
from __future__ import annotations

import torch
from torch import nn

from .config import RELATIONS


class MarkerRelationClassifier(nn.Module):
    def __init__(self, vocab_size: int, hidden_size: int = 48, num_layers: int = 2,
                 num_heads: int = 4, max_seq_length: int = 512, dropout: float = 0.1):
        super().__init__()
        self.hidden_size = hidden_size
        self.max_seq_length = max_seq_length
        self.token_embedding = nn.Embedding(vocab_size, hidden_size, padding_idx=0)
        self.position_embedding = nn.Embedding(max_seq_length, hidden_size)
        layer = nn.TransformerEncoderLayer(
            d_model=hidden_size, nhead=num_heads, dim_feedforward=4 * hidden_size,
            dropout=dropout, batch_first=True,
        )
        self.encoder = nn.TransformerEncoder(layer, num_layers=num_layers,
                                             enable_nested_tensor=False)
        self.head = nn.Linear(2 * hidden_size, len(RELATIONS))

    def encode(self, token_ids: torch.Tensor, padding_mask: torch.Tensor) -> torch.Tensor:
        positions = torch.arange(token_ids.size(1), device=token_ids.device)
        states = self.token_embedding(token_ids) + self.position_embedding(positions)
        return self.encoder(states, src_key_padding_mask=padding_mask)

    def forward_head(self, states: torch.Tensor, e1_positions: torch.Tensor,
                     e2_positions: torch.Tensor) -> torch.Tensor:
        """(B, T, H) states + marker positions -> (B, 10) scores via the
        concatenated 2H marker representation."""
        batch = torch.arange(states.size(0), device=states.device)
        rep = torch.cat([states[batch, e1_positions], states[batch, e2_positions]], dim=1)
        assert rep.size(1) == 2 * self.hidden_size
        return self.head(rep)

    def forward(self, token_ids, padding_mask, e1_positions, e2_positions):
        return self.forward_head(self.encode(token_ids, padding_mask), e1_positions, e2_positions)


def make_batch(encoded, device="cpu"):
    """Dynamic padding to the batch maximum."""
    width = max(len(e.token_ids) for e in encoded)
    token_ids = torch.zeros((len(encoded), width), dtype=torch.long, device=device)
    padding = torch.ones((len(encoded), width), dtype=torch.bool, device=device)
    for i, e in enumerate(encoded):
        n = len(e.token_ids)
        token_ids[i, :n] = torch.tensor(e.token_ids, dtype=torch.long)
        padding[i, :n] = False
    e1 = torch.tensor([e.e1_position for e in encoded], dtype=torch.long, device=device)
    e2 = torch.tensor([e.e2_position for e in encoded], dtype=torch.long, device=device)
    labels = torch.tensor([e.label_id for e in encoded], dtype=torch.long, device=device)
    return token_ids, padding, e1, e2, labels
