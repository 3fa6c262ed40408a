collect_ignore = ["src/notemesh/__main__.py", "demos", "examples"]
