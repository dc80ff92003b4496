"""Module execution entry: ``python -m flowdesk [launcher] ...``.

Mirrors the two console scripts so subprocess callers do not depend on
PATH: plain arguments go to the operator CLI, a leading ``launcher``
argument selects the host agent.
"""

import sys

from .cli import launcher_main, main

if __name__ == "__main__":
    if sys.argv[1:2] == ["launcher"]:
        sys.argv = [sys.argv[0] + " launcher"] + sys.argv[2:]
        launcher_main()
    else:
        main()
