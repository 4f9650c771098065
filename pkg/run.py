"""
BusyQ - Application Runner
============================
Start the HTTP server with a single command.

Usage:
    python run.py

Prerequisites:
    pip install -r requirements.txt

The server will start on http://localhost:8000
API docs available at http://localhost:8000/docs
"""

import os
import sys

# Add project root to path
sys.path.insert(0, os.path.dirname(os.path.abspath(__file__)))

def main():
    print("=" * 60)
    print("  BusyQ — M|G|∞ busy-period analysis")
    print("  Starting server...")
    print("=" * 60)

    # Export the reference tables once so they can be inspected as CSV
    from busyq.config import GOLDEN_CSV
    if not os.path.exists(GOLDEN_CSV):
        print("\n📂 Reference table export not found. Writing it...")
        from data.reference_tables import export_golden_tables
        export_golden_tables(GOLDEN_CSV)

    from busyq.config import HOST, PORT
    import uvicorn
    uvicorn.run(
        "busyq.app:app",
        host=HOST,
        port=PORT,
        reload=False,
        log_level="info"
    )

if __name__ == "__main__":
    main()
