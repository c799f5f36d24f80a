"""Independent per-layer workload / input-size oracle for the shipped model
descriptors. Values printed here are frozen into tests/test_dnn_catalog.cpp."""
import json
import pathlib
import sys

root = pathlib.Path(__file__).resolve().parents[2] / "models"


def workload(layer):
    if layer["kind"] == "conv":
        return 2 * layer["H"] * layer["W"] * (layer["c_in"] * layer["ker"] ** 2 + 1) * layer["c_out"]
    return (2 * layer["u_in"] - 1) * layer["u_out"]


def input_bytes(layer, rho):
    if layer["kind"] == "conv":
        return layer["H"] * layer["W"] * layer["c_in"] * rho
    return layer["u_in"] * rho


for name in sys.argv[1:] or ["alexnet", "resnet18", "vgg16"]:
    d = json.loads((root / f"{name}.json").read_text())
    b = [workload(l) for l in d["layers"]]
    dl = [input_bytes(l, d["rho_bytes"]) for l in d["layers"]]
    print(name, "L =", len(b), "total =", sum(b))
    print("  B =", b)
    print("  D =", dl)
