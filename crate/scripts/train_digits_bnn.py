"""Train a small binarized MLP on the sklearn 8x8 digits and export it.

Writes digits_mlp.toml / digits_mlp.bin (model) and digits_test.bin
(held-out split) into the output directory. Hidden activations and all
dense weights are +-1; batch norm is folded into per-channel affine layers.

    python scripts/train_digits_bnn.py crates/core/data
"""

import struct
import sys
from pathlib import Path

import numpy as np
import torch
from sklearn.datasets import load_digits
from sklearn.model_selection import train_test_split
from torch import nn

HIDDEN = 128
EPOCHS = 300
SEED = 0


class SignSTE(torch.autograd.Function):
    @staticmethod
    def forward(ctx, x):
        ctx.save_for_backward(x)
        return torch.where(x >= 0, 1.0, -1.0)

    @staticmethod
    def backward(ctx, g):
        (x,) = ctx.saved_tensors
        return g * (x.abs() <= 1).to(g.dtype)


def bsign(x):
    return SignSTE.apply(x)


class BinDense(nn.Linear):
    def forward(self, x):
        return nn.functional.linear(x, bsign(self.weight))


class Net(nn.Module):
    def __init__(self):
        super().__init__()
        self.bn0 = nn.BatchNorm1d(64)
        self.fc1 = BinDense(64, HIDDEN, bias=False)
        self.bn1 = nn.BatchNorm1d(HIDDEN)
        self.fc2 = BinDense(HIDDEN, HIDDEN, bias=False)
        self.bn2 = nn.BatchNorm1d(HIDDEN)
        self.fc3 = BinDense(HIDDEN, 10, bias=False)
        self.bn3 = nn.BatchNorm1d(10)

    def forward(self, x):
        x = bsign(self.bn0(x))
        x = bsign(self.bn1(self.fc1(x)))
        x = bsign(self.bn2(self.fc2(x)))
        return self.bn3(self.fc3(x))


def fold(bn):
    scale = bn.weight / torch.sqrt(bn.running_var + bn.eps)
    shift = bn.bias - bn.running_mean * scale
    return scale.detach().numpy().astype("<f4"), shift.detach().numpy().astype("<f4")


def host_forward(layers, x):
    """Mirror of the Rust engine, used to check the export."""
    for kind, *p in layers:
        if kind == "affine":
            x = x * p[0] + p[1]
        elif kind == "sign":
            x = np.where(x >= 0, 1.0, -1.0).astype("f4")
        else:
            x = x @ p[0].T.astype("f4")
    return x


def tensor_bytes(arr, dtype_code):
    head = b"CIMT" + struct.pack("<BBH", 1, dtype_code, arr.ndim)
    head += b"".join(struct.pack("<I", d) for d in arr.shape)
    return head + arr.tobytes()


def main(out):
    torch.manual_seed(SEED)
    np.random.seed(SEED)
    digits = load_digits()
    x = digits.data.astype("f4")
    y = digits.target
    xtr, xte, ytr, yte = train_test_split(x, y, test_size=0.2, random_state=SEED, stratify=y)

    net = Net()
    opt = torch.optim.Adam(net.parameters(), lr=1e-2)
    sched = torch.optim.lr_scheduler.CosineAnnealingLR(opt, EPOCHS)
    xt, yt = torch.tensor(xtr), torch.tensor(ytr)
    for _ in range(EPOCHS):
        net.train()
        perm = torch.randperm(len(xt))
        for i in range(0, len(xt), 64):
            idx = perm[i : i + 64]
            opt.zero_grad()
            loss = nn.functional.cross_entropy(net(xt[idx]), yt[idx])
            loss.backward()
            opt.step()
            for fc in (net.fc1, net.fc2, net.fc3):
                fc.weight.data.clamp_(-1, 1)
        sched.step()

    net.eval()
    layers = []
    blob = bytearray()
    entries = []

    def ref(arr):
        r = {"offset": len(blob), "len": arr.size}
        blob.extend(arr.tobytes())
        return r

    def affine(bn):
        s, t = fold(bn)
        layers.append(("affine", s, t))
        entries.append({"kind": "affine", "scale": ref(s), "shift": ref(t)})

    def sign():
        layers.append(("sign",))
        entries.append({"kind": "quantize", "mode": "sign"})

    def dense(fc):
        w = np.where(fc.weight.detach().numpy() >= 0, 1, -1).astype("i1")
        layers.append(("dense", w))
        entries.append({"kind": "dense", "units": w.shape[0], "alphabet": "binary", "weights": ref(w)})

    affine(net.bn0)
    sign()
    dense(net.fc1)
    affine(net.bn1)
    sign()
    dense(net.fc2)
    affine(net.bn2)
    sign()
    dense(net.fc3)
    affine(net.bn3)

    with torch.no_grad():
        torch_acc = (net(torch.tensor(xte)).argmax(1).numpy() == yte).mean()
    host_acc = (host_forward(layers, xte).argmax(1) == yte).mean()
    print(f"test accuracy: torch {torch_acc:.4f}, exported {host_acc:.4f}")

    out = Path(out)
    out.mkdir(parents=True, exist_ok=True)
    (out / "digits_mlp.bin").write_bytes(bytes(blob))
    lines = [
        'format = "cimsim-model"',
        "version = 1",
        'weights = "digits_mlp.bin"',
        "input_shape = [64]",
    ]
    for e in entries:
        lines.append("\n[[layers]]")
        for k, v in e.items():
            if isinstance(v, dict):
                v = "{ " + ", ".join(f"{a} = {b}" for a, b in v.items()) + " }"
            elif isinstance(v, str):
                v = f'"{v}"'
            lines.append(f"{k} = {v}")
    (out / "digits_mlp.toml").write_text("\n".join(lines) + "\n")
    (out / "digits_test.bin").write_bytes(
        tensor_bytes(np.ascontiguousarray(xte, "<f4"), 1)
        + tensor_bytes(np.ascontiguousarray(yte, "<i4"), 4)
    )


if __name__ == "__main__":
    main(sys.argv[1] if len(sys.argv) > 1 else "crates/core/data")
