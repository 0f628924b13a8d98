from phimdp.utils.csv_io import (
    curve_to_csv, history_to_csv, load_history, manifest_text, parse_history, qtable_to_csv,
    rows_to_csv, write_outputs, write_text,
)

__all__ = [
    "history_to_csv", "parse_history", "load_history",
    "qtable_to_csv", "curve_to_csv", "rows_to_csv", "manifest_text",
    "write_text", "write_outputs",
]
