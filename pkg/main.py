#!/usr/bin/env python3
"""
FMD-Stats - Fréchet Motion Distance Auswertung
Einstiegspunkt der Anwendung
"""

import sys

from app_controller import FmdStatsApp


def main():
    """Hauptfunktion - Startet die Anwendung"""
    app = FmdStatsApp()
    return app.run(sys.argv[1:])


if __name__ == '__main__':
    sys.exit(main())
