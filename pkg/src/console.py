import logging
from datetime import datetime
from typing import Sequence

from rich import box
from rich.console import Console
from rich.logging import RichHandler
from rich.panel import Panel
from rich.table import Table
from rich.text import Text

# stdout carries result data only
console = Console(stderr=True)

COLORS = {
    "primary": "#4285f4",
    "success": "#34a853",
    "warning": "#fbbc04",
    "error": "#ea4335",
    "muted": "#9aa0a6",
    "cyan": "#00bcd4",
}

LOG_LEVELS = ("DEBUG", "INFO", "WARNING", "ERROR")


def setup_logging(level: str = "WARNING") -> None:
    """Route the package's loggers through a rich handler on stderr."""
    logging.basicConfig(
        level=level.upper(),
        format="%(message)s",
        datefmt="[%X]",
        handlers=[RichHandler(console=console, show_path=False, rich_tracebacks=False)],
        force=True,
    )


def print_banner(subcommand: str) -> None:
    banner = Text()
    banner.append("✦ ", style=f"bold {COLORS['primary']}")
    banner.append("intersub", style="bold white")
    banner.append("  ", style="")
    banner.append(subcommand, style=COLORS["muted"])
    console.print(Panel(banner, border_style=COLORS["primary"], box=box.ROUNDED, padding=(0, 2)))


def print_error(msg: str) -> None:
    console.print(f"  [{COLORS['error']}]✗[/]  {msg}")


def print_success(msg: str) -> None:
    console.print(f"  [{COLORS['success']}]✓[/]  {msg}")


def print_info(msg: str) -> None:
    ts = datetime.now().strftime("%H:%M:%S")
    console.print(f"  [{COLORS['muted']}]{ts}[/]  {msg}")


def print_table(title: str, columns: Sequence[str], rows: Sequence[Sequence], limit: int = 12) -> None:
    """Pretty summary of a result table; long tables show head and tail only."""
    table = Table(title=title, box=box.ROUNDED, border_style=COLORS["muted"])
    for name in columns:
        table.add_column(name, justify="right", style=COLORS["cyan"])
    shown = list(rows)
    if len(shown) > limit:
        half = limit // 2
        shown = shown[:half] + [["…"] * len(columns)] + shown[-half:]
    for row in shown:
        table.add_row(*(f"{v:.6g}" if isinstance(v, float) else str(v) for v in row))
    console.print(table)
