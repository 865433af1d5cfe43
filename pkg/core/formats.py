"""
Gemeinsame Helfer für die versionierten Textformate
===================================================

MOT1, FEAT1, STATS1 und FMDMODEL1 sind zeilenbasierte Textformate:
eine Kopfzeile mit Magic-Token, danach Zeilen mit reellen Zahlen.
Zahlen werden mit 17 signifikanten Stellen geschrieben, damit ein
float64 verlustfrei zurückgelesen wird. Kommentarzeilen mit '#'
sind vor der Kopfzeile erlaubt.
"""

from typing import Iterable, List, Optional, Tuple

import numpy as np

from .errors import ParseError

REAL_FORMAT = '.17g'
INVALID_ENCODING = "Ungültige UTF-8-Kodierung"


def format_reals(values: Iterable[float]) -> str:
    """Formatiert Zahlen als eine Zeile mit 17 signifikanten Stellen"""
    return ' '.join(format(float(v), REAL_FORMAT) for v in values)


def parse_reals(text: str, line: int, expected: Optional[int] = None) -> np.ndarray:
    """
    Liest eine Zeile reeller Zahlen

    Args:
        text: Zeileninhalt
        line: Zeilennummer (1-basiert) für Fehlermeldungen
        expected: Erwartete Anzahl Werte (None = beliebig)

    Returns:
        float64-Array

    Raises:
        ParseError: Bei ungültigen Zahlen, nicht-endlichen Werten oder falscher Anzahl
    """
    tokens = text.split()
    if expected is not None and len(tokens) != expected:
        raise ParseError(line, f"{expected} Werte erwartet, {len(tokens)} gefunden")
    try:
        values = np.array([float(t) for t in tokens], dtype=np.float64)
    except ValueError as e:
        raise ParseError(line, f"Ungültige Zahl ({e})") from None
    if not np.all(np.isfinite(values)):
        raise ParseError(line, "Nicht-endlicher Wert")
    return values


def read_lines(path) -> Tuple[List[Tuple[int, str]], List[str]]:
    """
    Liest eine Textdatei und trennt führende Kommentare ab

    Leere Zeilen werden übersprungen.

    Returns:
        Tuple (Datenzeilen als (Zeilennummer, Text), Kommentartexte ohne '#')

    Raises:
        ParseError: Wenn die Datei kein gültiges UTF-8 ist
    """
    try:
        with open(path, 'r', encoding='utf-8') as f:
            raw = f.read().splitlines()
    except UnicodeDecodeError:
        raise ParseError(None, INVALID_ENCODING) from None

    comments = []
    lines = []
    for number, text in enumerate(raw, start=1):
        stripped = text.strip()
        if not stripped:
            continue
        if not lines and stripped.startswith('#'):
            comments.append(stripped[1:].strip())
            continue
        lines.append((number, stripped))
    return lines, comments


def parse_header(lines: List[Tuple[int, str]], magic: str, n_fields: int) -> List[str]:
    """
    Prüft die Kopfzeile und gibt die Felder nach dem Magic-Token zurück

    Raises:
        ParseError: Wenn die Datei leer ist oder das Magic-Token fehlt
    """
    if not lines:
        raise ParseError(None, f"Leere Datei, '{magic}' erwartet")
    number, text = lines[0]
    fields = text.split()
    if fields[0] != magic:
        raise ParseError(number, f"Magic-Token '{magic}' erwartet, '{fields[0]}' gefunden")
    if len(fields) != n_fields + 1:
        raise ParseError(number, f"Kopfzeile benötigt {n_fields} Felder nach '{magic}'")
    return fields[1:]


def parse_int(token: str, line: int, name: str, minimum: int = 0) -> int:
    """Liest eine ganze Zahl aus der Kopfzeile"""
    try:
        value = int(token)
    except ValueError:
        raise ParseError(line, f"'{name}' ist keine ganze Zahl: {token}") from None
    if value < minimum:
        raise ParseError(line, f"'{name}' muss >= {minimum} sein")
    return value
