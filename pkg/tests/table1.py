"""Reference confidence table: (no response, response) and the assigned label."""
CLASSES = ("no response", "response")
ROWS = [
    (0.185, 0.815, "response"),
    (0.015, 0.985, "response"),
    (0.937, 0.063, "no response"),
    (1.000, 0.000, "no response"),
    (1.000, 0.000, "no response"),
    (0.144, 0.856, "response"),
    (0.951, 0.049, "no response"),
    (1.000, 0.000, "no response"),
    (0.858, 0.142, "no response"),
    (0.000, 1.000, "response"),
    (0.937, 0.063, "no response"),
    (0.000, 1.000, "response"),
]
