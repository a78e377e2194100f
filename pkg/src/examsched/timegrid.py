"""Exam-period calendar: time slots and the derived slot-pattern sets.

The grid is a flat, chronologically ordered list of 3-hour slots over a
short run of days.  From it we derive the pattern sets every downstream
consumer (penalty model, evaluator, report) shares:

* back-to-back pairs: adjacent slots within one day,
* night-to-morning pairs: a day's night slot followed by the next day's
  first slot,
* 3-in-24h / 4-in-48h windows: every 3- (4-) slot subset whose total span,
  first start to last end, fits in 24 (48) hours.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass
from pathlib import Path

MINUTES_PER_DAY = 24 * 60
WEEKDAY_LABELS = ("Mon", "Tue", "Wed", "Thu", "Fri", "Sat", "Sun")

# Clock times are not institution-invariant; these defaults keep 3-hour
# slots and make the 24h/48h window sets well defined.  All configurable.
DEFAULT_DAYTIME_SLOTS = (("08:00", "11:00"), ("11:30", "14:30"), ("15:00", "18:00"))
DEFAULT_NIGHT_SLOT = ("19:00", "22:00")
DEFAULT_EXAM_MINUTES = 180


class GridConfigError(ValueError):
    """Raised for an inconsistent exam-period configuration."""


def parse_clock(text: str) -> int:
    """'HH:MM' -> minutes after midnight."""
    try:
        hh, mm = text.strip().split(":")
        minutes = int(hh) * 60 + int(mm)
    except (ValueError, AttributeError) as exc:
        raise GridConfigError(f"bad clock time {text!r}") from exc
    if not 0 <= minutes < MINUTES_PER_DAY:
        raise GridConfigError(f"clock time out of range: {text!r}")
    return minutes


def format_clock(minutes: int) -> str:
    return f"{minutes // 60:02d}:{minutes % 60:02d}"


@dataclass(frozen=True)
class DaySpec:
    label: str
    has_night: bool


@dataclass(frozen=True)
class ExamPeriodConfig:
    """Shape of the exam period: days, in-day slot times, exam length."""

    days: tuple[DaySpec, ...]
    daytime_slot_times: tuple[tuple[int, int], ...]  # minutes after midnight
    night_slot_time: tuple[int, int]
    exam_length_minutes: int = DEFAULT_EXAM_MINUTES

    def __post_init__(self) -> None:
        if not self.days:
            raise GridConfigError("need at least one exam day")
        if not self.daytime_slot_times:
            raise GridConfigError("need at least one daytime slot per day")
        prev_end = -1
        for start, end in self.daytime_slot_times:
            if start <= prev_end:
                raise GridConfigError("daytime slots must be increasing and non-overlapping")
            if end - start != self.exam_length_minutes:
                raise GridConfigError(
                    f"slot {format_clock(start)}-{format_clock(end)} is not "
                    f"{self.exam_length_minutes} minutes long"
                )
            prev_end = end
        n_start, n_end = self.night_slot_time
        if n_end - n_start != self.exam_length_minutes:
            raise GridConfigError("night slot does not match the exam length")
        if any(d.has_night for d in self.days) and n_start <= prev_end:
            raise GridConfigError("night slot must start after the last daytime slot ends")

    @staticmethod
    def standard(num_days: int = 6) -> "ExamPeriodConfig":
        """Mon-start period with nights on every day except Fridays and the
        last day (the default 6-day shape yields 22 slots)."""
        if num_days < 1:
            raise GridConfigError("need at least one exam day")
        labels = [WEEKDAY_LABELS[i % 7] for i in range(num_days)]
        days = tuple(
            DaySpec(label, has_night=(label != "Fri" and i != num_days - 1))
            for i, label in enumerate(labels)
        )
        return ExamPeriodConfig(
            days=days,
            daytime_slot_times=tuple(
                (parse_clock(a), parse_clock(b)) for a, b in DEFAULT_DAYTIME_SLOTS
            ),
            night_slot_time=(parse_clock(DEFAULT_NIGHT_SLOT[0]), parse_clock(DEFAULT_NIGHT_SLOT[1])),
        )

    def with_day_count(self, num_days: int) -> "ExamPeriodConfig":
        """Resize the period, recomputing night placement by the standard
        rule (nights except on 'Fri' labels and the last day)."""
        if num_days < 1:
            raise GridConfigError("need at least one exam day")
        labels = [self.days[i].label for i in range(min(num_days, len(self.days)))]
        if num_days > len(self.days):
            # continue the weekday cycle after the last configured label
            try:
                next_i = WEEKDAY_LABELS.index(self.days[-1].label) + 1
            except ValueError:
                next_i = 0
            labels += [WEEKDAY_LABELS[(next_i + j) % 7] for j in range(num_days - len(self.days))]
        days = tuple(
            DaySpec(label, has_night=(label != "Fri" and i != num_days - 1))
            for i, label in enumerate(labels)
        )
        return ExamPeriodConfig(
            days=days,
            daytime_slot_times=self.daytime_slot_times,
            night_slot_time=self.night_slot_time,
            exam_length_minutes=self.exam_length_minutes,
        )

    def to_doc(self) -> dict:
        return {
            "days": [[d.label, d.has_night] for d in self.days],
            "daytime_slots": [[format_clock(a), format_clock(b)] for a, b in self.daytime_slot_times],
            "night_slot": [format_clock(self.night_slot_time[0]), format_clock(self.night_slot_time[1])],
            "exam_length_minutes": self.exam_length_minutes,
        }

    @staticmethod
    def from_doc(doc: dict) -> "ExamPeriodConfig":
        try:
            days = tuple(DaySpec(str(label), bool(night)) for label, night in doc["days"])
            daytime = tuple((parse_clock(a), parse_clock(b)) for a, b in doc["daytime_slots"])
            night = (parse_clock(doc["night_slot"][0]), parse_clock(doc["night_slot"][1]))
        except (KeyError, TypeError, ValueError) as exc:
            raise GridConfigError(f"bad exam-period config: {exc}") from exc
        return ExamPeriodConfig(
            days=days,
            daytime_slot_times=daytime,
            night_slot_time=night,
            exam_length_minutes=int(doc.get("exam_length_minutes", DEFAULT_EXAM_MINUTES)),
        )


def load_grid_config(path: str | Path) -> ExamPeriodConfig:
    with open(path, encoding="utf-8") as fh:
        return ExamPeriodConfig.from_doc(json.load(fh))


@dataclass(frozen=True)
class TimeSlot:
    id: int
    day_index: int
    seq_in_day: int
    start: int  # minutes since 00:00 of day 0
    end: int
    is_night: bool

    @property
    def day_minute(self) -> int:
        return self.start % MINUTES_PER_DAY


@dataclass(frozen=True)
class TimeGrid:
    config: ExamPeriodConfig
    slots: tuple[TimeSlot, ...]

    def __len__(self) -> int:
        return len(self.slots)

    @property
    def num_slots(self) -> int:
        return len(self.slots)

    def day_label(self, day_index: int) -> str:
        return self.config.days[day_index].label

    def slots_of_day(self, day_index: int) -> list[TimeSlot]:
        return [s for s in self.slots if s.day_index == day_index]

    def slot_name(self, slot_id: int) -> str:
        s = self.slots[slot_id]
        return f"{self.day_label(s.day_index)} {format_clock(s.day_minute)}"

    def resolve_slot_ref(self, ref: str | int) -> int:
        """Slot reference: numeric id, or 'Day:seq' with 1-based seq."""
        if isinstance(ref, int):
            sid = ref
        else:
            text = str(ref).strip()
            if ":" in text and not text.replace(":", "").isdigit():
                day_label, seq = text.split(":")
                seq_i = int(seq) - 1
                for s in self.slots:
                    if self.day_label(s.day_index) == day_label and s.seq_in_day == seq_i:
                        return s.id
                raise KeyError(f"no slot {text!r} in grid")
            sid = int(text)
        if not 0 <= sid < len(self.slots):
            raise KeyError(f"slot id {sid} out of range")
        return sid

    def to_doc(self) -> dict:
        return {
            "config": self.config.to_doc(),
            "slots": [
                {
                    "id": s.id,
                    "day": s.day_index,
                    "seq": s.seq_in_day,
                    "start": s.start,
                    "end": s.end,
                    "night": s.is_night,
                }
                for s in self.slots
            ],
        }


def build_grid(config: ExamPeriodConfig) -> TimeGrid:
    """Lay out the configured days into globally ordered slots with dense
    chronological ids."""
    slots: list[TimeSlot] = []
    for day_i, day in enumerate(config.days):
        base = day_i * MINUTES_PER_DAY
        seq = 0
        for start, end in config.daytime_slot_times:
            slots.append(
                TimeSlot(
                    id=len(slots),
                    day_index=day_i,
                    seq_in_day=seq,
                    start=base + start,
                    end=base + end,
                    is_night=False,
                )
            )
            seq += 1
        if day.has_night:
            n_start, n_end = config.night_slot_time
            slots.append(
                TimeSlot(
                    id=len(slots),
                    day_index=day_i,
                    seq_in_day=seq,
                    start=base + n_start,
                    end=base + n_end,
                    is_night=True,
                )
            )
    return TimeGrid(config=config, slots=tuple(slots))


@dataclass(frozen=True)
class PatternSets:
    """Slot patterns the penalties range over.  Pairs are ordered by start;
    windows are ascending slot-id tuples, one entry per qualifying subset."""

    b2b_pairs: tuple[tuple[int, int], ...]
    pm_to_am_pairs: tuple[tuple[int, int], ...]
    windows_3in24: tuple[tuple[int, int, int], ...]
    windows_4in48: tuple[tuple[int, int, int, int], ...]

    def to_doc(self) -> dict:
        return {
            "b2b_pairs": [list(p) for p in self.b2b_pairs],
            "pm_to_am_pairs": [list(p) for p in self.pm_to_am_pairs],
            "windows_3in24": [list(w) for w in self.windows_3in24],
            "windows_4in48": [list(w) for w in self.windows_4in48],
        }


def _window_subsets(slots: tuple[TimeSlot, ...], size: int, span_minutes: int):
    """All ascending `size`-subsets whose span (first start to last end)
    fits in `span_minutes`.  Enumeration walks each first-slot's reachable
    suffix rather than all C(n,k) subsets."""
    out = []
    n = len(slots)
    for i in range(n):
        limit = slots[i].start + span_minutes
        reach = [j for j in range(i + 1, n) if slots[j].end <= limit]
        for rest in itertools.combinations(reach, size - 1):
            out.append((i, *rest))
    return tuple(out)


def pattern_sets(grid: TimeGrid) -> PatternSets:
    if not grid.slots:
        raise GridConfigError("cannot derive pattern sets from an empty grid")
    slots = grid.slots
    b2b = []
    pm_to_am = []
    for a, b in zip(slots, slots[1:]):
        if a.day_index == b.day_index:
            b2b.append((a.id, b.id))
        elif a.is_night and b.day_index == a.day_index + 1 and b.seq_in_day == 0:
            pm_to_am.append((a.id, b.id))
    return PatternSets(
        b2b_pairs=tuple(b2b),
        pm_to_am_pairs=tuple(pm_to_am),
        windows_3in24=_window_subsets(slots, 3, 24 * 60),
        windows_4in48=_window_subsets(slots, 4, 48 * 60),
    )
