#!/usr/bin/env python3
"""
Coloured terminal tables for check results and study summaries.
"""

import math
from typing import Iterable, List, Sequence

from colorama import Fore, Style, init as colorama_init


class Console:
    """
    Formats result tables, optionally with colorama colours.
    """

    STATUS_COLORS = {
        'PASS': Fore.GREEN,
        'FAIL': Fore.RED,
        'WARN': Fore.YELLOW,
        'INFO': Fore.CYAN,
    }

    def __init__(self, use_color: bool = True):
        """
        Initialize console.

        Args:
            use_color: Emit ANSI colours (colorama translates them on Windows)
        """
        self.use_color = use_color
        if use_color:
            colorama_init()

    def colorize(self, text: str, color: str) -> str:
        if not self.use_color:
            return text
        return f"{color}{text}{Style.RESET_ALL}"

    def status(self, passed: bool) -> str:
        """PASS/FAIL tag."""
        tag = 'PASS' if passed else 'FAIL'
        return self.colorize(tag, self.STATUS_COLORS[tag])

    @staticmethod
    def number(value: float) -> str:
        if value is None:
            return "-"
        if not math.isfinite(value):
            return str(value)
        return f"{value:.4e}"

    @staticmethod
    def _table(header: Sequence[str], rows: Iterable[Sequence[str]]) -> List[str]:
        rows = [list(r) for r in rows]
        # Width ignores ANSI codes
        def visible(s: str) -> int:
            for code in (Fore.GREEN, Fore.RED, Fore.YELLOW, Fore.CYAN, Style.RESET_ALL):
                s = s.replace(code, "")
            return len(s)

        widths = [len(h) for h in header]
        for row in rows:
            for i, cell in enumerate(row):
                widths[i] = max(widths[i], visible(cell))

        def line(cells):
            return "  ".join(c + " " * (widths[i] - visible(c)) for i, c in enumerate(cells)).rstrip()

        out = [line(header), "  ".join("-" * w for w in widths)]
        out.extend(line(row) for row in rows)
        return out

    def check_table(self, results) -> str:
        """
        Table of verification results.

        Args:
            results: CheckResult objects (name, passed, value, threshold, detail)
        """
        rows = [(r.name, self.status(r.passed), self.number(r.value), r.threshold, r.detail)
                for r in results]
        passed = sum(1 for r in results if r.passed)
        lines = self._table(("check", "status", "value", "threshold", "detail"), rows)
        lines.append(f"\n{passed}/{len(results)} checks passed")
        return "\n".join(lines)

    def energy_table(self, report) -> str:
        """Per-(m, n) table of an EnergyReport plus the totals."""
        rows = []
        for (m, n) in sorted(report.terms):
            values = report.terms[(m, n)]
            rows.append((f"({m[0]},{m[1]}),{n}", self.number(values.I), self.number(values.II),
                         self.number(values.III), self.number(values.IV),
                         self.number(report.noise_floor.get((m, n), float("nan")))))
        lines = self._table(("(m),n", "E_I", "E_II", "E_III", "E_IV", "noise"), rows)
        lines.append("")
        for name, value in report.summary().items():
            if name != "t":
                lines.append(f"{name}: {self.number(value)}")
        return "\n".join(lines)

    def mms_table(self, result, low: float, high: float) -> str:
        """Errors, pairwise orders and the fitted order of an MMS study."""
        pairwise = [None] + list(result.pairwise)
        rows = [(str(n), self.number(h), self.number(e), self.number(p) if p is not None else "-")
                for n, h, e, p in zip(result.n3, result.h, result.errors, pairwise)]
        lines = self._table(("n3", "h", "error", "order"), rows)
        order = result.order
        lines.append(f"\nObserved order: {order:.3f}  {self.status(low <= order <= high)}")
        return "\n".join(lines)

    def limit_table(self, result) -> str:
        """Rows of an eps sweep with its monotonicity verdict."""
        rows = []
        for r in result.rows:
            if r.aborted:
                rows.append((f"{r.eps:g}", self.colorize("aborted", Fore.RED), "-", "-", r.reason))
            else:
                rows.append((f"{r.eps:g}", self.number(r.difference), self.number(r.ratio),
                             self.number(r.b_deviation), ""))
        lines = self._table(("eps", "|eta_eps - eta_0|", "ratio", "|B - I|", "note"), rows)
        lines.append(f"\nShared step: {result.dt:.4e}")
        if result.reference_aborted:
            lines.append(self.colorize(f"Reference eps = 0 aborted: {result.reference_reason}", Fore.RED))
        lines.append(f"Monotone decrease: {self.status(result.monotone)}")
        if math.isfinite(result.fitted_c):
            lines.append(f"Fitted c in |B - I| ~ c eps^2: {result.fitted_c:.4e}")
        return "\n".join(lines)

    def events(self, events) -> str:
        if not events:
            return self.colorize("No monitor events", Fore.GREEN)
        return "\n".join(self.colorize(f"[{e.kind}] t={e.time:.6g}: {e.message}", Fore.YELLOW)
                         for e in events)
