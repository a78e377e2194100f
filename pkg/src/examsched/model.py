"""Solver-agnostic binary program for exam-slot assignment.

Families map onto the formulation one-to-one: assignment variables x over
(group, slot); student/faculty slot-presence v and w linked to x with
big-M couplings; penalty indicators z for each inconvenience family; and
constraint families c1..c16 covering totality, linking, availability,
seat capacity, pins, blocks, pair penalties, and window penalties.

The blocked-slot family c7 is built as x <= 1 - q: a block means the
assignment is forbidden.  Rows for the 24h/48h window families are
instantiated only for students who can actually sit 3 (resp. 4) exams;
the skipped rows are vacuous and change neither feasibility nor the
objective.  The pin family c6 keeps only its binding rows (r = 1).
"""

from __future__ import annotations

import hashlib
import io
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import scipy.sparse as sp

from .evaluate import Schedule
from .ingest import Instance, Weights, canonical_json_bytes

PHASE_FULL = "full"
PHASE_1 = "phase1"


class ModelBuildError(ValueError):
    pass


@dataclass(frozen=True)
class FixSet:
    """Assignment pins layered on an instance, one per group."""

    pins: tuple[tuple[int, int], ...]  # (group_id, slot_id)

    def __post_init__(self) -> None:
        seen: set[int] = set()
        for g, _ in self.pins:
            if g in seen:
                raise ModelBuildError(f"group {g} pinned twice in fix set")
            seen.add(g)

    @staticmethod
    def from_schedule(schedule: Schedule, group_ids=None) -> "FixSet":
        items = sorted(schedule.assignment.items())
        if group_ids is not None:
            wanted = set(group_ids)
            items = [(g, t) for g, t in items if g in wanted]
        return FixSet(tuple(items))


@dataclass(frozen=True)
class _Family:
    name: str
    offset: int
    count: int
    namer: object  # local index -> name suffix


class MilpModel:
    """Binary program plus the structural payload solvers exploit."""

    def __init__(
        self,
        instance: Instance,
        weights: Weights,
        phase: str,
        group_ids: tuple[int, ...],
        r_eff: np.ndarray,
        fixes: FixSet | None = None,
    ):
        self.instance = instance
        self.weights = weights
        self.phase = phase
        self.group_ids = tuple(group_ids)
        self.r_eff = r_eff
        self.fixes = fixes or FixSet(())
        self._matrix_cache = None

        inst = instance
        T = inst.num_slots
        S = inst.num_students
        F = inst.num_faculty
        Gm = len(self.group_ids)
        mg = np.array(self.group_ids, dtype=np.int64)
        pat = inst.patterns
        self._mg = mg
        self._B = inst.b[:, mg] if Gm else np.zeros((S, 0), dtype=bool)
        self._D = inst.d[:, mg] if Gm else np.zeros((F, 0), dtype=bool)
        self._pairs2 = np.array(pat.b2b_pairs, dtype=np.int64).reshape(-1, 2)
        self._pairsp = np.array(pat.pm_to_am_pairs, dtype=np.int64).reshape(-1, 2)
        self._w3 = np.array(pat.windows_3in24, dtype=np.int64).reshape(-1, 3)
        self._w4 = np.array(pat.windows_4in48, dtype=np.int64).reshape(-1, 4)
        deg = self._B.sum(axis=1)
        self._s3 = np.nonzero(deg >= 3)[0]
        self._s4 = np.nonzero(deg >= 4)[0]
        P2, Pp = len(self._pairs2), len(self._pairsp)
        W3, W4 = len(self._w3), len(self._w4)

        full = phase == PHASE_FULL
        self._var_families = self._layout(
            [
                ("x", Gm * T, lambda k: f"x_g{self.group_ids[k // T]}_t{k % T}"),
                ("v", S * T, lambda k: f"v_s{k // T}_t{k % T}"),
                ("w", F * T if full else 0, lambda k: f"w_f{k // T}_t{k % T}"),
                ("zov", S * T, lambda k: f"zov_s{k // T}_t{k % T}"),
                ("zb2b", S * P2, lambda k: f"zb2b_s{k // P2}_t{self._pairs2[k % P2, 0]}"),
                ("zpm", S * Pp if Pp else 0, lambda k: f"zpm_s{k // Pp}_t{self._pairsp[k % Pp, 0]}"),
                ("z3", S if full and W3 else 0, lambda k: f"z3_s{k}"),
                ("z4", S if full and W4 else 0, lambda k: f"z4_s{k}"),
                ("zfov", F if full else 0, lambda k: f"zfov_f{k}"),
                ("zfb2b", F if full and P2 else 0, lambda k: f"zfb2b_f{k}"),
            ]
        )
        n_pins = int(r_eff[mg].sum()) if Gm else 0
        self._row_families = self._layout(
            [
                ("c1", Gm, lambda k: f"c1_g{self.group_ids[k]}"),
                ("c2", S * T, lambda k: f"c2_s{k // T}_t{k % T}"),
                ("c3", S * T, lambda k: f"c3_s{k // T}_t{k % T}"),
                ("c4", Gm * T, lambda k: f"c4_g{self.group_ids[k // T]}_t{k % T}"),
                ("c5", T, lambda k: f"c5_t{k}"),
                ("c6", n_pins, self._c6_name),
                ("c7", Gm * T, lambda k: f"c7_g{self.group_ids[k // T]}_t{k % T}"),
                ("c8", S * T, lambda k: f"c8_s{k // T}_t{k % T}"),
                ("c9", S * P2, lambda k: f"c9_s{k // P2}_t{self._pairs2[k % P2, 0]}"),
                ("c10", S * Pp if Pp else 0, lambda k: f"c10_s{k // Pp}_t{self._pairsp[k % Pp, 0]}"),
                ("c11", len(self._s3) * W3 if full else 0, lambda k: f"c11_s{self._s3[k // W3]}_w{k % W3}"),
                ("c12", len(self._s4) * W4 if full else 0, lambda k: f"c12_s{self._s4[k // W4]}_w{k % W4}"),
                ("c13", F * T if full else 0, lambda k: f"c13_f{k // T}_t{k % T}"),
                ("c14", F * T if full else 0, lambda k: f"c14_f{k // T}_t{k % T}"),
                ("c15", F * T if full else 0, lambda k: f"c15_f{k // T}_t{k % T}"),
                ("c16", F * P2 if full else 0, lambda k: f"c16_f{k // P2}_t{self._pairs2[k % P2, 0]}"),
            ]
        )
        self.metadata = {
            "instance_digest": inst.digest(),
            "weights": weights.to_doc(),
            "phase": phase,
            "group_ids": list(self.group_ids),
            "fixes": [list(p) for p in self.fixes.pins],
            "m2": inst.m2,
            "m3": inst.m3,
            "notes": [
                "blocked-slot rows use x <= 1 - q (a block forbids the assignment)",
                "window rows instantiated only where a student can sit enough exams",
            ],
        }

    @staticmethod
    def _layout(entries) -> dict[str, _Family]:
        families = {}
        offset = 0
        for name, count, namer in entries:
            families[name] = _Family(name, offset, count, namer)
            offset += count
        return families

    def _c6_name(self, k: int) -> str:
        pg, pt = np.nonzero(self.r_eff[self._mg])
        return f"c6_g{self.group_ids[pg[k]]}_t{pt[k]}"

    # --- shape ----------------------------------------------------------

    @property
    def num_variables(self) -> int:
        return sum(f.count for f in self._var_families.values())

    @property
    def num_constraints(self) -> int:
        return sum(f.count for f in self._row_families.values())

    def family_var_counts(self) -> dict[str, int]:
        return {name: f.count for name, f in self._var_families.items() if f.count}

    def family_row_counts(self) -> dict[str, int]:
        return {name: f.count for name, f in self._row_families.items() if f.count}

    def var_name(self, idx: int) -> str:
        return self._name_in(self._var_families, idx)

    def row_name(self, idx: int) -> str:
        return self._name_in(self._row_families, idx)

    @staticmethod
    def _name_in(families: dict[str, _Family], idx: int) -> str:
        for fam in families.values():
            if fam.offset <= idx < fam.offset + fam.count:
                return fam.namer(idx - fam.offset)
        raise IndexError(idx)

    def var_offset(self, family: str) -> int:
        return self._var_families[family].offset

    def var_names(self) -> list[str]:
        return [self.var_name(i) for i in range(self.num_variables)]

    def digest(self) -> str:
        return hashlib.sha256(canonical_json_bytes(self.metadata)).hexdigest()

    # --- numeric form -----------------------------------------------------

    def matrix(self):
        """(A, senses, rhs, c): sparse constraint matrix in canonical row
        order, row senses ('E','G','L'), right-hand sides, objective."""
        if self._matrix_cache is None:
            self._matrix_cache = self._assemble()
        return self._matrix_cache

    def _assemble(self):
        inst = self.instance
        T, S, F = inst.num_slots, inst.num_students, inst.num_faculty
        Gm = len(self.group_ids)
        mg = self._mg
        vf, rf = self._var_families, self._row_families
        P2, Pp = len(self._pairs2), len(self._pairsp)
        W3, W4 = len(self._w3), len(self._w4)
        full = self.phase == PHASE_FULL

        rows: list[np.ndarray] = []
        cols: list[np.ndarray] = []
        vals: list[np.ndarray] = []
        t_range = np.arange(T, dtype=np.int64)

        def add(r, c, v):
            r = np.asarray(r, dtype=np.int64).ravel()
            c = np.asarray(c, dtype=np.int64).ravel()
            rows.append(r)
            cols.append(c)
            vals.append(np.broadcast_to(np.asarray(v, dtype=np.float64), r.shape).ravel())

        senses = np.empty(self.num_constraints, dtype="U1")
        rhs = np.zeros(self.num_constraints, dtype=np.float64)

        def block(name, sense, rhs_vals):
            fam = rf[name]
            if fam.count:
                senses[fam.offset : fam.offset + fam.count] = sense
                rhs[fam.offset : fam.offset + fam.count] = rhs_vals
            return fam.offset

        bs, bg = np.nonzero(self._B)
        ds, dg = np.nonzero(self._D)
        x_off = vf["x"].offset
        v_off = vf["v"].offset

        # c1: each group takes exactly one slot
        off = block("c1", "E", 1.0)
        if Gm:
            add(np.repeat(off + np.arange(Gm), T), x_off + np.arange(Gm * T), 1.0)

        # helper pattern: one row per (s,t), x terms summed over enrolled groups
        def sv_rows(off):
            return (bs[:, None] * T + t_range[None, :]).ravel() + off

        def sx_cols():
            return (bg[:, None] * T + t_range[None, :]).ravel() + x_off

        # c2: M2 v >= sum_g b x
        off = block("c2", "G", 0.0)
        add(off + np.arange(S * T), v_off + np.arange(S * T), float(inst.m2))
        if len(bs):
            add(sv_rows(off), sx_cols(), -1.0)

        # c3: v <= sum_g b x
        off = block("c3", "L", 0.0)
        add(off + np.arange(S * T), v_off + np.arange(S * T), 1.0)
        if len(bs):
            add(sv_rows(off), sx_cols(), -1.0)

        # c4: availability
        off = block("c4", "L", np.tile(inst.a.astype(np.float64), Gm))
        if Gm:
            add(off + np.arange(Gm * T), x_off + np.arange(Gm * T), 1.0)

        # c5: per-slot seat cap
        off = block("c5", "L", float(inst.m1))
        if Gm:
            n_g = inst.n_g[mg].astype(np.float64)
            add(np.tile(off + t_range, Gm), x_off + np.arange(Gm * T), np.repeat(n_g, T))

        # c6: pins (binding rows only)
        pg, pt = np.nonzero(self.r_eff[mg]) if Gm else (np.array([], dtype=int),) * 2
        off = block("c6", "G", 1.0)
        if len(pg):
            add(off + np.arange(len(pg)), x_off + pg * T + pt, 1.0)

        # c7: blocks, x <= 1 - q
        off = block("c7", "L", (1.0 - inst.q[mg].astype(np.float64)).ravel() if Gm else 0.0)
        if Gm:
            add(off + np.arange(Gm * T), x_off + np.arange(Gm * T), 1.0)

        # c8: slot overlap cap and penalty trigger
        off = block("c8", "L", 1.0)
        if len(bs):
            add(sv_rows(off), sx_cols(), 1.0)
        add(off + np.arange(S * T), vf["zov"].offset + np.arange(S * T), -1.0)

        def pair_block(name, pairs, n_pairs, person_count, pres_off, z_fam):
            off = block(name, "L", 1.0)
            if not n_pairs or not person_count:
                return
            persons = np.arange(person_count, dtype=np.int64)
            row = (persons[:, None] * n_pairs + np.arange(n_pairs)[None, :]).ravel() + off
            for side in (0, 1):
                add(row, (persons[:, None] * T + pairs[None, :, side]).ravel() + pres_off, 1.0)
            add(row, vf[z_fam].offset + np.arange(person_count * n_pairs), -1.0)

        # c9/c10: adjacent and night-to-morning pairs
        pair_block("c9", self._pairs2, P2, S, v_off, "zb2b")
        pair_block("c10", self._pairsp, Pp, S, v_off, "zpm")

        def window_block(name, windows, n_w, members, students, z_fam, cap):
            off = block(name, "L", float(cap))
            if not n_w or not len(students):
                return
            row = (np.arange(len(students))[:, None] * n_w + np.arange(n_w)[None, :]).ravel() + off
            for j in range(members):
                add(row, (students[:, None] * T + windows[None, :, j]).ravel() + v_off, 1.0)
            z_cols = vf[z_fam].offset + np.repeat(students, n_w)
            add(row, z_cols, -1.0)

        if full:
            window_block("c11", self._w3, W3, 3, self._s3, "z3", 2)
            window_block("c12", self._w4, W4, 4, self._s4, "z4", 3)

            w_off = vf["w"].offset
            # c13: M3 w >= sum_g d x ; c14: w <= sum_g d x
            off = block("c13", "G", 0.0)
            if F:
                add(off + np.arange(F * T), w_off + np.arange(F * T), float(inst.m3))
                if len(ds):
                    add((ds[:, None] * T + t_range[None, :]).ravel() + off, (dg[:, None] * T + t_range[None, :]).ravel() + x_off, -1.0)
            off = block("c14", "L", 0.0)
            if F:
                add(off + np.arange(F * T), w_off + np.arange(F * T), 1.0)
                if len(ds):
                    add((ds[:, None] * T + t_range[None, :]).ravel() + off, (dg[:, None] * T + t_range[None, :]).ravel() + x_off, -1.0)
            # c15: faculty slot overlap, z once per faculty member
            off = block("c15", "L", 1.0)
            if F:
                if len(ds):
                    add((ds[:, None] * T + t_range[None, :]).ravel() + off, (dg[:, None] * T + t_range[None, :]).ravel() + x_off, 1.0)
                add(off + np.arange(F * T), vf["zfov"].offset + np.repeat(np.arange(F), T), -1.0)
            # c16: faculty back-to-back, z once per faculty member
            off = block("c16", "L", 1.0)
            if F and P2:
                persons = np.arange(F, dtype=np.int64)
                row = (persons[:, None] * P2 + np.arange(P2)[None, :]).ravel() + off
                for side in (0, 1):
                    add(row, (persons[:, None] * T + self._pairs2[None, :, side]).ravel() + w_off, 1.0)
                add(row, vf["zfb2b"].offset + np.repeat(persons, P2), -1.0)

        if rows:
            r = np.concatenate(rows)
            c = np.concatenate(cols)
            v = np.concatenate(vals)
        else:
            r = c = np.zeros(0, dtype=np.int64)
            v = np.zeros(0, dtype=np.float64)
        A = sp.coo_matrix((v, (r, c)), shape=(self.num_constraints, self.num_variables)).tocsr()

        obj = np.zeros(self.num_variables, dtype=np.float64)
        w = self.weights

        def set_obj(fam, weight):
            f = vf[fam]
            if f.count:
                obj[f.offset : f.offset + f.count] = weight

        set_obj("zov", w.overlap)
        set_obj("zb2b", w.b2b)
        set_obj("zpm", w.pm_to_am)
        if full:
            set_obj("z3", w.three_in_24)
            set_obj("z4", w.four_in_48)
            set_obj("zfov", w.fac_overlap)
            set_obj("zfb2b", w.fac_b2b)
        return A, senses, rhs, obj

    # --- induced assignment ------------------------------------------------

    def induced_values(self, schedule: Schedule) -> np.ndarray:
        """Variable values induced by a schedule: x as given, v/w propagated
        through the linking rows, penalty indicators at their minimal
        feasible values."""
        inst = self.instance
        T, S, F = inst.num_slots, inst.num_students, inst.num_faculty
        vf = self._var_families
        values = np.zeros(self.num_variables, dtype=np.float64)

        slot_of = np.empty(len(self.group_ids), dtype=np.int64)
        for pos, g in enumerate(self.group_ids):
            if g not in schedule.assignment:
                raise ModelBuildError(f"schedule does not place group {g}")
            slot_of[pos] = schedule.assignment[g]
        x = vf["x"]
        values[x.offset + np.arange(len(self.group_ids)) * T + slot_of] = 1.0

        counts = np.zeros((S, T), dtype=np.int64)
        for pos in range(len(self.group_ids)):
            counts[:, slot_of[pos]] += self._B[:, pos]
        if (counts > 2).any():
            raise ModelBuildError("schedule puts a student in more than two same-slot exams")
        v = (counts > 0).astype(np.float64)
        values[vf["v"].offset : vf["v"].offset + S * T] = v.ravel()
        values[vf["zov"].offset : vf["zov"].offset + S * T] = (counts >= 2).astype(np.float64).ravel()

        def pair_values(pairs, pres):
            if not len(pairs):
                return np.zeros((pres.shape[0], 0))
            return pres[:, pairs[:, 0]] * pres[:, pairs[:, 1]]

        zb = vf["zb2b"]
        if zb.count:
            values[zb.offset : zb.offset + zb.count] = pair_values(self._pairs2, v).ravel()
        zp = vf["zpm"]
        if zp.count:
            values[zp.offset : zp.offset + zp.count] = pair_values(self._pairsp, v).ravel()

        if self.phase == PHASE_FULL:
            if vf["z3"].count:
                full3 = (v[:, self._w3].sum(axis=2) == 3).any(axis=1)
                values[vf["z3"].offset : vf["z3"].offset + S] = full3
            if vf["z4"].count:
                full4 = (v[:, self._w4].sum(axis=2) == 4).any(axis=1)
                values[vf["z4"].offset : vf["z4"].offset + S] = full4
            fcounts = np.zeros((F, T), dtype=np.int64)
            for pos in range(len(self.group_ids)):
                fcounts[:, slot_of[pos]] += self._D[:, pos]
            if (fcounts > 2).any():
                raise ModelBuildError("schedule puts a faculty member in more than two same-slot exams")
            fw = (fcounts > 0).astype(np.float64)
            if vf["w"].count:
                values[vf["w"].offset : vf["w"].offset + F * T] = fw.ravel()
            if vf["zfov"].count:
                values[vf["zfov"].offset : vf["zfov"].offset + F] = (fcounts >= 2).any(axis=1)
            if vf["zfb2b"].count:
                values[vf["zfb2b"].offset : vf["zfb2b"].offset + F] = (
                    pair_values(self._pairs2, fw).any(axis=1) if len(self._pairs2) else 0.0
                )
        return values

    def objective_at(self, schedule: Schedule) -> float:
        """Objective evaluated at the induced variable values, summed per
        penalty family in canonical order."""
        values = self.induced_values(schedule)
        vf = self._var_families
        w = self.weights
        total = 0.0
        for fam, weight in (
            ("zov", w.overlap),
            ("zb2b", w.b2b),
            ("zpm", w.pm_to_am),
            ("z3", w.three_in_24),
            ("z4", w.four_in_48),
            ("zfov", w.fac_overlap),
            ("zfb2b", w.fac_b2b),
        ):
            f = vf[fam]
            if f.count:
                total += weight * float(values[f.offset : f.offset + f.count].sum())
        return total


# --- builders ----------------------------------------------------------------


def _effective_pins(instance: Instance, fixes: FixSet | None) -> np.ndarray:
    r_eff = instance.r.copy()
    if fixes:
        for g, t in fixes.pins:
            if not 0 <= g < instance.num_groups or not 0 <= t < instance.num_slots:
                raise ModelBuildError(f"fix ({g}, {t}) is out of range")
            existing = np.nonzero(instance.r[g])[0]
            if existing.size and int(existing[0]) != t:
                raise ModelBuildError(
                    f"fix pins group {g} to slot {t} but it is already required at {int(existing[0])}"
                )
            r_eff[g, t] = True
    for g in range(instance.num_groups):
        pins = np.nonzero(r_eff[g])[0]
        if len(pins) > 1:
            raise ModelBuildError(f"group {g} required at {len(pins)} different slots")
        for t in pins:
            if not instance.a[t]:
                raise ModelBuildError(f"group {g} pinned to unavailable slot {int(t)}")
            if instance.q[g, t]:
                raise ModelBuildError(f"group {g} pinned to blocked slot {int(t)}")
    return r_eff


def build_full_model(instance: Instance, weights: Weights | None = None, fixes: FixSet | None = None) -> MilpModel:
    w = weights or instance.weights
    r_eff = _effective_pins(instance, fixes)
    return MilpModel(
        instance=instance,
        weights=w,
        phase=PHASE_FULL,
        group_ids=tuple(range(instance.num_groups)),
        r_eff=r_eff,
        fixes=fixes,
    )


def build_phase1_model(instance: Instance, weights: Weights | None = None, phase1_groups=()) -> MilpModel:
    w = weights or instance.weights
    r_eff = _effective_pins(instance, None)
    chosen = sorted(set(int(g) for g in phase1_groups))
    for g in chosen:
        if not 0 <= g < instance.num_groups:
            raise ModelBuildError(f"phase-1 group {g} does not exist")
    pinned = set(int(g) for g in np.nonzero(r_eff.any(axis=1))[0])
    missing = pinned - set(chosen)
    if missing:
        raise ModelBuildError(f"phase-1 selection omits pinned groups {sorted(missing)}")
    return MilpModel(
        instance=instance,
        weights=w,
        phase=PHASE_1,
        group_ids=tuple(chosen),
        r_eff=r_eff,
    )


# --- text export ----------------------------------------------------------


def export_model(model: MilpModel, fmt: str) -> str:
    buf = io.StringIO()
    write_model(model, buf, fmt)
    return buf.getvalue()


def write_model_file(model: MilpModel, path: str | Path, fmt: str) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        write_model(model, fh, fmt)


def write_model(model: MilpModel, out, fmt: str) -> None:
    if fmt == "lp":
        _write_lp(model, out)
    elif fmt == "mps":
        _write_mps(model, out)
    else:
        raise ValueError(f"unsupported export format {fmt!r} (use 'lp' or 'mps')")


def _fmt_coef(value: float) -> str:
    if value == int(value):
        return str(int(value))
    return repr(value)


def _write_lp(model: MilpModel, out) -> None:
    A, senses, rhs, obj = model.matrix()
    A = A.tocsr()
    names = model.var_names()
    out.write(f"\\ examsched model {model.digest()[:16]}\n")
    out.write("Minimize\n obj:")
    terms = np.nonzero(obj)[0]
    if not len(terms):
        out.write(" 0 " + (names[0] if names else "x0"))
    for j in terms:
        out.write(f" + {_fmt_coef(obj[j])} {names[j]}")
    out.write("\nSubject To\n")
    op = {"E": "=", "L": "<=", "G": ">="}
    for i in range(A.shape[0]):
        row = []
        for k in range(A.indptr[i], A.indptr[i + 1]):
            coef = A.data[k]
            sign = "+" if coef >= 0 else "-"
            row.append(f"{sign} {_fmt_coef(abs(coef))} {names[A.indices[k]]}")
        out.write(f" {model.row_name(i)}: {' '.join(row)} {op[senses[i]]} {_fmt_coef(rhs[i])}\n")
    out.write("Binaries\n")
    for j, name in enumerate(names):
        out.write(f" {name}\n")
    out.write("End\n")


def _write_mps(model: MilpModel, out) -> None:
    A, senses, rhs, obj = model.matrix()
    csc = A.tocsc()
    out.write("NAME          EXAMSCHED\n")
    out.write("ROWS\n")
    out.write(" N  OBJ\n")
    sense_tag = {"E": "E", "L": "L", "G": "G"}
    chunk: list[str] = []
    for i in range(A.shape[0]):
        chunk.append(f" {sense_tag[senses[i]]}  {model.row_name(i)}\n")
        if len(chunk) >= 65536:
            out.write("".join(chunk))
            chunk.clear()
    out.write("".join(chunk))
    chunk.clear()

    out.write("COLUMNS\n")
    out.write("    MARKER                 'MARKER'                 'INTORG'\n")
    for j in range(model.num_variables):
        name = model.var_name(j)
        entries = [
            (model.row_name(int(csc.indices[k])), csc.data[k])
            for k in range(csc.indptr[j], csc.indptr[j + 1])
        ]
        if obj[j]:
            entries.append(("OBJ", obj[j]))
        if not entries:
            entries.append(("OBJ", 0.0))
        for a in range(0, len(entries), 2):
            pair = entries[a : a + 2]
            line = f"    {name:<12}  {pair[0][0]:<12}  {_fmt_coef(pair[0][1])}"
            if len(pair) == 2:
                line += f"   {pair[1][0]:<12}  {_fmt_coef(pair[1][1])}"
            chunk.append(line + "\n")
        if len(chunk) >= 65536:
            out.write("".join(chunk))
            chunk.clear()
    out.write("".join(chunk))
    chunk.clear()
    out.write("    MARKER                 'MARKER'                 'INTEND'\n")

    out.write("RHS\n")
    for i in np.nonzero(rhs)[0]:
        chunk.append(f"    RHS           {model.row_name(int(i)):<12}  {_fmt_coef(rhs[i])}\n")
        if len(chunk) >= 65536:
            out.write("".join(chunk))
            chunk.clear()
    out.write("".join(chunk))
    chunk.clear()

    out.write("BOUNDS\n")
    for j in range(model.num_variables):
        chunk.append(f" BV BND           {model.var_name(j)}\n")
        if len(chunk) >= 65536:
            out.write("".join(chunk))
            chunk.clear()
    out.write("".join(chunk))
    out.write("ENDATA\n")
