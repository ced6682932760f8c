"""Baseline: LLVM-style register-to-memory demotion on the IR.

Mirrors what ``opt -reg2mem`` does before translation: critical edges are
split, an alloca insertion point is created, every value used outside its
block (or by a φ) is spilled to a stack slot with loads before each use, and
finally every φ is replaced by stores in its predecessors and a load.
Used only to compare graph sizes against φ-elimination.
"""

from __future__ import annotations

import copy
from typing import Iterator, Optional

from ..ir.model import IrBasicBlock, IrFunction, IrInstruction, IrModule, IrOperand
from ..ir.types import I32, LABEL, TypeRef

_SPLITTABLE = ("br", "switch")


def _local(name: str, ty: Optional[TypeRef]) -> IrOperand:
    return IrOperand("local-ref", name, ty, f"%{_quote(name)}")


def _quote(name: str) -> str:
    return name if all(c.isalnum() or c in "._-$" for c in name) else f'"{name}"'


def _uses(instr: IrInstruction) -> Iterator[IrOperand]:
    yield from instr.operands
    callee = instr.attrs.get("callee")
    if callee is not None:
        yield callee


def _successors(instr: Optional[IrInstruction]) -> list[str]:
    if instr is None:
        return []
    return list(instr.attrs.get("targets", []))


class _Namer:
    def __init__(self, fn: IrFunction):
        self.taken = {n for n, _ in fn.params}
        self.taken |= {i.result_name for i in fn.instructions() if i.result_name}
        self.taken |= {b.label for b in fn.blocks}

    def fresh(self, base: str) -> str:
        name, n = base, 0
        while name in self.taken:
            n += 1
            name = f"{base}{n}"
        self.taken.add(name)
        return name


def _retarget(term: IrInstruction, old: str, new: str) -> None:
    for op in term.operands:
        if op.kind == "block-label" and op.value == old:
            op.value, op.text = new, f"%{_quote(new)}"
    term.attrs["targets"] = [new if t == old else t for t in term.attrs.get("targets", [])]
    if term.opcode == "switch":
        term.attrs["cases"] = [(v, new if lab == old else lab) for v, lab in term.attrs["cases"]]
        if term.attrs.get("default") == old:
            term.attrs["default"] = new


def split_critical_edges(fn: IrFunction, namer: _Namer) -> int:
    preds: dict[str, set[str]] = {b.label: set() for b in fn.blocks}
    for b in fn.blocks:
        for s in _successors(b.terminator):
            preds.setdefault(s, set()).add(b.label)
    split = 0
    for b in list(fn.blocks):
        term = b.terminator
        if term is None or term.opcode not in _SPLITTABLE:
            continue
        succs = list(dict.fromkeys(_successors(term)))
        if len(succs) < 2:
            continue
        for s in succs:
            if len(preds.get(s, ())) < 2 or fn.block(s) is None:
                continue
            label = namer.fresh(f"{b.label}.{s}_crit_edge")
            br = IrInstruction("br", operands=[IrOperand("block-label", s, LABEL, f"%{_quote(s)}")],
                               raw_text=f"br label %{_quote(s)}", attrs={"targets": [s]})
            fn.blocks.insert(fn.blocks.index(fn.block(s)), IrBasicBlock(label, [br]))
            _retarget(term, s, label)
            for instr in fn.block(s).instructions:
                if instr.opcode == "phi":
                    instr.attrs["incoming"] = [(v, label if p == b.label else p) for v, p in instr.attrs["incoming"]]
            preds[s].discard(b.label)
            preds[s].add(label)
            preds[label] = {b.label}
            split += 1
    return split


def _first_non_phi(block: IrBasicBlock) -> int:
    i = 0
    while i < len(block.instructions) and block.instructions[i].opcode in ("phi", "landingpad"):
        i += 1
    return i


def _before_terminator(block: IrBasicBlock) -> int:
    return len(block.instructions) - (1 if block.terminator is not None else 0)


def _store(value: IrOperand, slot: str, ty: TypeRef) -> IrInstruction:
    ptr = _local(slot, TypeRef.pointer(ty))
    return IrInstruction("store", None, [value, ptr], [ty],
                         raw_text=f"store {ty} {value.text}, {TypeRef.pointer(ty)} {ptr.text}")


def _load(name: str, slot: str, ty: TypeRef) -> IrInstruction:
    ptr = _local(slot, TypeRef.pointer(ty))
    return IrInstruction("load", name, [ptr], [ty], attrs={"result_type": ty},
                         raw_text=f"%{_quote(name)} = load {ty}, {TypeRef.pointer(ty)} {ptr.text}")


def _alloca(slot: str, ty: TypeRef) -> IrInstruction:
    return IrInstruction("alloca", slot, [], [ty], attrs={"result_type": TypeRef.pointer(ty)},
                         raw_text=f"%{_quote(slot)} = alloca {ty}")


def _reg2mem_function(fn: IrFunction) -> None:
    namer = _Namer(fn)
    split_critical_edges(fn, namer)
    entry = fn.blocks[0]
    point_name = namer.fresh("reg2mem alloca point")
    point = IrInstruction("bitcast", point_name, [IrOperand("literal-int", 0, I32, "0")], [I32, I32],
                          raw_text=f'%"{point_name}" = bitcast i32 0 to i32', attrs={"result_type": I32})
    entry.instructions.insert(_first_non_phi(entry), point)
    allocas: list[IrInstruction] = []

    owner: dict[str, IrBasicBlock] = {}
    defs: dict[str, IrInstruction] = {}
    for b in fn.blocks:
        for i in b.instructions:
            if i.result_name:
                owner[i.result_name] = b
                defs[i.result_name] = i

    def escapes(name: str) -> bool:
        home = owner[name]
        for b in fn.blocks:
            for i in b.instructions:
                for op in _uses(i):
                    if op.kind == "local-ref" and op.value == name and (b is not home or i.opcode == "phi"):
                        return True
        return False

    worklist = [
        n for n, i in defs.items()
        if i is not point and not (i.opcode == "alloca" and owner[n] is entry)
        and i.result_type is not None and escapes(n)
    ]
    for name in worklist:
        instr, home = defs[name], owner[name]
        ty = instr.result_type
        slot = namer.fresh(f"{name}.reg2mem")
        allocas.append(_alloca(slot, ty))
        # loads before every use
        for b in fn.blocks:
            idx = 0
            while idx < len(b.instructions):
                user = b.instructions[idx]
                hits = [op for op in _uses(user) if op.kind == "local-ref" and op.value == name]
                if not hits or user is instr:
                    idx += 1
                    continue
                if user.opcode == "phi":
                    for value, pred in user.attrs["incoming"]:
                        if value.kind == "local-ref" and value.value == name:
                            pblock = fn.block(pred)
                            reload = namer.fresh(f"{name}.reload")
                            pblock.instructions.insert(_before_terminator(pblock), _load(reload, slot, ty))
                            value.value, value.text = reload, f"%{_quote(reload)}"
                    idx += 1
                    continue
                reload = namer.fresh(f"{name}.reload")
                b.instructions.insert(idx, _load(reload, slot, ty))
                for op in hits:
                    op.value, op.text = reload, f"%{_quote(reload)}"
                idx += 2
        # store right after the definition
        store = _store(_local(name, ty), slot, ty)
        if instr.is_terminator:
            dest = fn.block(instr.attrs.get("normal", ""))
            if dest is not None:
                dest.instructions.insert(_first_non_phi(dest), store)
        else:
            pos = home.instructions.index(instr) + 1
            if instr.opcode == "phi":
                pos = _first_non_phi(home)
            home.instructions.insert(pos, store)

    for b in fn.blocks:
        for idx, instr in enumerate(list(b.instructions)):
            if instr.opcode != "phi":
                continue
            ty = instr.result_type
            slot = namer.fresh(f"{instr.result_name}.reg2mem")
            allocas.append(_alloca(slot, ty))
            for value, pred in instr.attrs["incoming"]:
                pblock = fn.block(pred)
                if pblock is not None:
                    pblock.instructions.insert(_before_terminator(pblock), _store(value, slot, ty))
            pos = b.instructions.index(instr)
            b.instructions[pos] = _load(instr.result_name, slot, ty)
        # loads replacing φs must come after any φs still in the block
    entry.instructions[_first_non_phi(entry):_first_non_phi(entry)] = allocas


def reg2mem(module: IrModule) -> IrModule:
    """Return a demoted deep copy of ``module``; the input is left untouched."""
    out = copy.deepcopy(module)
    for fn in out.functions:
        if not fn.is_declaration and fn.blocks:
            _reg2mem_function(fn)
    return out
