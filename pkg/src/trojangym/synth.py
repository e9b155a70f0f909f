"""Seeded generator of toy synthesizable designs plus four Trojan infectors.

The clean designs are small combinational/pipelined modules with no
comparisons, conditionals, or register self-feedback. Each infector parses
a clean design, splices in one structural motif, and pretty-prints the
result, so every emitted source passes the compile gate and keeps the
original port interface:

* HT1 (change functionality): magic-constant trigger XORs an output.
* HT2 (information leakage): gated shift register leaks an input bit
  through a covert output mux.
* HT3 (denial of service): free-running counter that eventually forces an
  output to zero.
* HT4 (performance degradation): parasitic accumulator and rotator burning
  power on every clock.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional, Tuple

import numpy as np

from .core import HtType
from .dfg import Dfg, build_dfg
from .verilog import nodes as vn
from .verilog import parse_source, print_ast, syntax_check

_WIDTHS = (4, 8, 16)
_BIN_OPS = ("&", "|", "^", "+")


@dataclass
class SynthDesign:
    design_id: str
    source: str
    ht: Optional[HtType] = None  # None = clean


@dataclass
class SynthConfig:
    n_clean: int = 50
    n_per_ht: int = 50
    seed: int = 0


@dataclass
class SynthCorpus:
    clean: List[SynthDesign] = field(default_factory=list)
    infected: Dict[HtType, List[SynthDesign]] = field(default_factory=dict)

    def graphs(self) -> Tuple[List[Dfg], Dict[HtType, List[Dfg]]]:
        clean = [design_graph(d) for d in self.clean]
        infected = {ht: [design_graph(d) for d in designs]
                    for ht, designs in self.infected.items()}
        return clean, infected


def design_graph(design: SynthDesign) -> Dfg:
    result = parse_source(design.source)
    if result.ast is None:
        raise ValueError(f"{design.design_id} does not parse: "
                         + "; ".join(d.render() for d in result.diagnostics))
    return build_dfg(result.ast)


def generate_clean_source(rng: np.random.Generator, index: int) -> str:
    """One clean toy module; always at least one assign-driven output."""
    width = int(rng.choice(_WIDTHS))
    n_inputs = int(rng.integers(2, 5))
    n_wires = int(rng.integers(1, 4))
    n_assign_outs = int(rng.integers(1, 3))
    n_reg_outs = int(rng.integers(0, 3))

    inputs = [f"d{i}" for i in range(n_inputs)]
    wires = [f"t{i}" for i in range(n_wires)]
    assign_outs = [f"y{i}" for i in range(n_assign_outs)]
    reg_outs = [f"q{i}" for i in range(n_reg_outs)]

    lines = [f"module toy{index:03d} ("]
    ports = ["    input wire clk"]
    ports += [f"    input wire [{width - 1}:0] {name}" for name in inputs]
    ports += [f"    output wire [{width - 1}:0] {name}" for name in assign_outs]
    ports += [f"    output reg [{width - 1}:0] {name}" for name in reg_outs]
    lines.append(",\n".join(ports))
    lines.append(");")

    available = list(inputs)

    def operand() -> str:
        name = available[int(rng.integers(len(available)))]
        if rng.random() < 0.15:
            return f"~{name}"
        if rng.random() < 0.15:
            shift = int(rng.integers(1, width))
            direction = ">>" if rng.random() < 0.5 else "<<"
            return f"({name} {direction} {shift})"
        return name

    def expression() -> str:
        op = _BIN_OPS[int(rng.integers(len(_BIN_OPS)))]
        text = f"{operand()} {op} {operand()}"
        if rng.random() < 0.3:
            op2 = _BIN_OPS[int(rng.integers(len(_BIN_OPS)))]
            text = f"({text}) {op2} {operand()}"
        return text

    for name in wires:
        lines.append(f"    wire [{width - 1}:0] {name};")
    for name in wires:
        lines.append(f"    assign {name} = {expression()};")
        available.append(name)
    for name in assign_outs:
        lines.append(f"    assign {name} = {expression()};")
    if reg_outs:
        lines.append("    always @(posedge clk) begin")
        for name in reg_outs:
            lines.append(f"        {name} <= {expression()};")
        lines.append("    end")
    lines.append("endmodule")
    return "\n".join(lines) + "\n"


def _parse_module(source: str) -> vn.ModuleDecl:
    result = parse_source(source)
    if result.ast is None:
        raise ValueError("infection target does not parse: "
                         + "; ".join(d.render() for d in result.diagnostics))
    return result.ast.modules[0]


def _port_width(mod: vn.ModuleDecl, name: str) -> int:
    port = mod.port(name)
    if port is None or port.range is None:
        return 1
    return abs(port.range.msb.value - port.range.lsb.value) + 1


def _data_inputs(mod: vn.ModuleDecl) -> List[str]:
    return [p.name for p in mod.ports
            if p.direction == "input" and p.range is not None]


def _assign_driven_outputs(mod: vn.ModuleDecl) -> List[Tuple[int, str]]:
    outs = {p.name for p in mod.ports if p.direction == "output"}
    hits = []
    for i, item in enumerate(mod.items):
        if isinstance(item, vn.ContAssign) and isinstance(item.target, vn.Ident) \
                and item.target.name in outs:
            hits.append((i, item.target.name))
    return hits


def _num(width: Optional[int], value: int) -> vn.Number:
    if width is None:
        return vn.Number(width=None, base=None, digits=str(value), value=value)
    return vn.Number(width=width, base="h", digits=f"{value:x}", value=value)


def _ident(name: str) -> vn.Ident:
    return vn.Ident(name=name)


def _decl(kind: str, name: str, width: int) -> vn.NetDecl:
    rng_node = None
    if width > 1:
        rng_node = vn.Range(msb=_num(None, width - 1), lsb=_num(None, 0))
    return vn.NetDecl(kind=kind, names=[name], range=rng_node)


def _clocked(assigns: List[vn.Assign]) -> vn.ProcBlock:
    body = vn.Block(stmts=list(assigns))
    sens = [vn.SensItem(edge="posedge", signal=_ident("clk"))]
    return vn.ProcBlock(kind="always", sensitivity=sens, body=body)


def _trigger_items(mod: vn.ModuleDecl, rng: np.random.Generator,
                   trig_name: str) -> List[object]:
    source = _data_inputs(mod)[int(rng.integers(len(_data_inputs(mod))))]
    width = _port_width(mod, source)
    magic = int(rng.integers(1, 2 ** min(width, 30)))
    compare = vn.Binary(op="==", lhs=_ident(source), rhs=_num(width, magic))
    return [_decl("wire", trig_name, 1),
            vn.ContAssign(target=_ident(trig_name), value=compare)]


def infect(source: str, ht: HtType, rng: np.random.Generator) -> str:
    mod = _parse_module(source)
    targets = _assign_driven_outputs(mod)
    if not targets and ht in (HtType.HT1, HtType.HT2, HtType.HT3):
        raise ValueError("design has no assign-driven output to retarget")

    if ht is HtType.HT1:
        idx, out_name = targets[int(rng.integers(len(targets)))]
        out_width = _port_width(mod, out_name)
        mask = int(rng.integers(1, 2 ** min(out_width, 30)))
        item = mod.items[idx]
        corrupted = vn.Binary(op="^", lhs=item.value, rhs=_num(out_width, mask))
        item.value = vn.Ternary(cond=_ident("ht_trig"), then=corrupted,
                                other=item.value)
        mod.items.extend(_trigger_items(mod, rng, "ht_trig"))

    elif ht is HtType.HT2:
        idx, out_name = targets[int(rng.integers(len(targets)))]
        out_width = max(2, _port_width(mod, out_name))
        secrets = _data_inputs(mod)
        secret = secrets[int(rng.integers(len(secrets)))]
        item = mod.items[idx]
        item.value = vn.Ternary(cond=_ident("ht_en"), then=_ident("ht_leak"),
                                other=item.value)
        shift = vn.Concat(parts=[
            vn.PartSelect(base=_ident("ht_leak"), left=_num(None, out_width - 2),
                          right=_num(None, 0), mode=":"),
            vn.BitSelect(base=_ident(secret), index=_num(None, 0)),
        ])
        gated = vn.IfStmt(cond=_ident("ht_en"),
                          then=vn.Assign(target=_ident("ht_leak"), value=shift,
                                         blocking=False))
        mod.items.extend(_trigger_items(mod, rng, "ht_en"))
        mod.items.append(_decl("reg", "ht_leak", out_width))
        mod.items.append(vn.ProcBlock(
            kind="always",
            sensitivity=[vn.SensItem(edge="posedge", signal=_ident("clk"))],
            body=vn.Block(stmts=[gated])))

    elif ht is HtType.HT3:
        idx, out_name = targets[int(rng.integers(len(targets)))]
        out_width = _port_width(mod, out_name)
        item = mod.items[idx]
        item.value = vn.Ternary(cond=_ident("ht_kill"), then=_num(out_width, 0),
                                other=item.value)
        count = vn.Assign(target=_ident("ht_cnt"), blocking=False,
                          value=vn.Binary(op="+", lhs=_ident("ht_cnt"),
                                          rhs=_num(8, 1)))
        kill = vn.Binary(op="==", lhs=_ident("ht_cnt"), rhs=_num(8, 0xFF))
        mod.items.append(_decl("reg", "ht_cnt", 8))
        mod.items.append(_decl("wire", "ht_kill", 1))
        mod.items.append(_clocked([count]))
        mod.items.append(vn.ContAssign(target=_ident("ht_kill"), value=kill))

    elif ht is HtType.HT4:
        step = int(rng.integers(1, 0xFFFF))
        acc = vn.Assign(target=_ident("ht_acc"), blocking=False,
                        value=vn.Binary(op="+", lhs=_ident("ht_acc"),
                                        rhs=_num(16, step)))
        rot = vn.Assign(
            target=_ident("ht_rot"), blocking=False,
            value=vn.Concat(parts=[
                vn.PartSelect(base=_ident("ht_rot"), left=_num(None, 14),
                              right=_num(None, 0), mode=":"),
                vn.BitSelect(base=_ident("ht_rot"), index=_num(None, 15)),
            ]))
        mix = vn.Assign(
            target=_ident("ht_mix"), blocking=False,
            value=vn.Binary(op="+",
                            lhs=vn.Binary(op="^", lhs=_ident("ht_mix"),
                                          rhs=_ident("ht_acc")),
                            rhs=_ident("ht_rot")))
        mod.items.append(_decl("reg", "ht_acc", 16))
        mod.items.append(_decl("reg", "ht_rot", 16))
        mod.items.append(_decl("reg", "ht_mix", 16))
        mod.items.append(_clocked([acc, rot, mix]))

    else:
        raise ValueError(f"unknown HT type {ht}")

    return print_ast(vn.Ast(modules=[mod]))


def generate_corpus(cfg: Optional[SynthConfig] = None) -> SynthCorpus:
    """Deterministic for a fixed seed; every design passes the compile gate."""
    cfg = cfg or SynthConfig()
    corpus = SynthCorpus(infected={ht: [] for ht in HtType})
    rng = np.random.default_rng(cfg.seed)
    index = 0
    for _ in range(cfg.n_clean):
        corpus.clean.append(
            SynthDesign(design_id=f"toy{index:03d}",
                        source=generate_clean_source(rng, index)))
        index += 1
    for ht in HtType:
        for _ in range(cfg.n_per_ht):
            base = generate_clean_source(rng, index)
            corpus.infected[ht].append(
                SynthDesign(design_id=f"toy{index:03d}",
                            source=infect(base, ht, rng), ht=ht))
            index += 1
    return corpus


def write_corpus(cfg: SynthConfig, directory) -> int:
    """Lay the corpus out as clean/ and HT1..HT4/ directories of .v files.
    Returns the number of files written; every file re-checks clean."""
    corpus = generate_corpus(cfg)
    root = Path(directory)
    written = 0
    groups = [("clean", corpus.clean)]
    groups += [(ht.name, corpus.infected[ht]) for ht in HtType]
    for sub, designs in groups:
        out = root / sub
        out.mkdir(parents=True, exist_ok=True)
        for design in designs:
            report = syntax_check(design.source)
            if not report.ok:
                raise RuntimeError(
                    f"{design.design_id} failed its own compile gate:\n"
                    + report.summary)
            (out / f"{design.design_id}.v").write_text(design.source,
                                                       encoding="utf-8")
            written += 1
    return written
