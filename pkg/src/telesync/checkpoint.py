"""Flat binary/JSON hybrid checkpoints.

Layout: an 8-byte magic, a little-endian uint32 header length, a UTF-8 JSON
header, then one little-endian float32 parameter block. The header carries
the kind, per-section parameter counts, and enough metadata to rebuild the
object; the loader validates the block length against the declared counts.
"""

from __future__ import annotations

import json
import struct
from pathlib import Path

import numpy as np

from .nn.ensemble import EnsembleConfig, EnsembleModel, NormScales
from .rl.sac import SacAgent, SacConfig

MAGIC = b"TSYNCKP1"


class CheckpointError(ValueError):
    pass


def save_blob(path, kind: str, meta: dict, sections: list[tuple[str, np.ndarray]]) -> None:
    header = {
        "kind": kind,
        "meta": meta,
        "sections": [{"name": name, "count": int(np.asarray(arr).size)}
                     for name, arr in sections],
    }
    flat = np.concatenate([np.asarray(arr, dtype=np.float64).ravel()
                           for _, arr in sections]) if sections else np.zeros(0)
    payload = flat.astype("<f4").tobytes()
    header_bytes = json.dumps(header).encode("utf-8")
    with open(path, "wb") as fh:
        fh.write(MAGIC)
        fh.write(struct.pack("<I", len(header_bytes)))
        fh.write(header_bytes)
        fh.write(payload)


def load_blob(path) -> tuple[dict, dict[str, np.ndarray]]:
    raw = Path(path).read_bytes()
    if raw[:8] != MAGIC:
        raise CheckpointError(f"{path}: not a telesync checkpoint")
    (header_len,) = struct.unpack("<I", raw[8:12])
    header = json.loads(raw[12:12 + header_len].decode("utf-8"))
    block = np.frombuffer(raw[12 + header_len:], dtype="<f4").astype(np.float64)
    declared = sum(s["count"] for s in header["sections"])
    if block.size != declared:
        raise CheckpointError(
            f"{path}: parameter block holds {block.size} floats, header declares {declared}")
    sections = {}
    offset = 0
    for s in header["sections"]:
        sections[s["name"]] = block[offset:offset + s["count"]]
        offset += s["count"]
    return header, sections


def _sac_cfg_meta(cfg: SacConfig) -> dict:
    return {
        "hidden": list(cfg.hidden),
        "learning_rate": cfg.learning_rate,
        "gamma": cfg.gamma,
        "tau": cfg.tau,
        "batch_size": cfg.batch_size,
        "kp_max": cfg.kp_max,
        "kd_max": cfg.kd_max,
        "dtype": cfg.dtype,
    }


def _sac_cfg_from_meta(meta: dict) -> SacConfig:
    return SacConfig(hidden=tuple(meta["hidden"]),
                     learning_rate=meta["learning_rate"], gamma=meta["gamma"],
                     tau=meta["tau"], batch_size=meta["batch_size"],
                     kp_max=meta["kp_max"], kd_max=meta["kd_max"],
                     dtype=meta.get("dtype", "float64"))


def save_agent(path, agent: SacAgent, *, variant: str, seed: int,
               env_steps: int, delays: dict, extra: dict | None = None,
               model: EnsembleModel | None = None) -> None:
    meta = {
        "variant": variant,
        "seed": seed,
        "env_steps": env_steps,
        "delays": delays,
        "input_dim": agent.input_dim,
        "action_dim": agent.action_dim,
        "sac": _sac_cfg_meta(agent.cfg),
    }
    if extra:
        meta["extra"] = extra
    sections = agent.network_sections()
    if model is not None:
        meta["ensemble"] = {
            "members": model.cfg.members,
            "hidden": list(model.cfg.hidden),
            "learning_rate": model.cfg.learning_rate,
            "huber_delta": model.cfg.huber_delta,
            "scales": [model.cfg.scales.position, model.cfg.scales.velocity,
                       model.cfg.scales.force],
            "train_steps": model.train_steps,
        }
        for i, member in enumerate(model.members):
            sections.append((f"ensemble_{i}", member.get_flat()))
    save_blob(path, "agent", meta, sections)


def load_agent(path) -> tuple[SacAgent, EnsembleModel | None, dict]:
    header, sections = load_blob(path)
    if header["kind"] != "agent":
        raise CheckpointError(f"{path}: expected an agent checkpoint")
    meta = header["meta"]
    agent = SacAgent(_sac_cfg_from_meta(meta["sac"]), input_dim=meta["input_dim"],
                     seed=0, action_dim=meta["action_dim"])
    agent.load_sections(sections)
    model = None
    if "ensemble" in meta:
        em = meta["ensemble"]
        pos, vel, force = em["scales"]
        cfg = EnsembleConfig(members=em["members"], hidden=tuple(em["hidden"]),
                             learning_rate=em["learning_rate"],
                             huber_delta=em["huber_delta"],
                             scales=NormScales(pos, vel, force))
        model = EnsembleModel(cfg, seed=0)
        for i, member in enumerate(model.members):
            member.set_flat(sections[f"ensemble_{i}"])
        model.train_steps = em["train_steps"]
    return agent, model, meta


def save_ensemble(path, model: EnsembleModel, *, seed: int, extra: dict | None = None) -> None:
    meta = {
        "members": model.cfg.members,
        "hidden": list(model.cfg.hidden),
        "learning_rate": model.cfg.learning_rate,
        "huber_delta": model.cfg.huber_delta,
        "scales": [model.cfg.scales.position, model.cfg.scales.velocity,
                   model.cfg.scales.force],
        "seed": seed,
        "train_steps": model.train_steps,
    }
    if extra:
        meta["extra"] = extra
    sections = [(f"member_{i}", m.get_flat()) for i, m in enumerate(model.members)]
    save_blob(path, "ensemble", meta, sections)


def load_ensemble(path) -> EnsembleModel:
    header, sections = load_blob(path)
    if header["kind"] != "ensemble":
        raise CheckpointError(f"{path}: expected an ensemble checkpoint")
    meta = header["meta"]
    pos, vel, force = meta["scales"]
    cfg = EnsembleConfig(members=meta["members"], hidden=tuple(meta["hidden"]),
                         learning_rate=meta["learning_rate"],
                         huber_delta=meta["huber_delta"],
                         scales=NormScales(pos, vel, force))
    model = EnsembleModel(cfg, seed=0)
    for i, member in enumerate(model.members):
        member.set_flat(sections[f"member_{i}"])
    model.train_steps = meta["train_steps"]
    return model
