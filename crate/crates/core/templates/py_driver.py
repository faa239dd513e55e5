import ast
import json
import os
import sys

CANDIDATE = "solution.py"


def _arguments(text):
    text = text.strip()
    if not text:
        return [], {}
    call = ast.parse("f(" + text + ")", mode="eval").body
    args = [ast.literal_eval(a) for a in call.args]
    kwargs = {kw.arg: ast.literal_eval(kw.value) for kw in call.keywords}
    return args, kwargs


def _guard(root):
    root = os.path.realpath(root)
    blocked = ("socket.", "subprocess.", "os.system", "os.exec", "os.fork", "os.posix_spawn", "os.spawn", "os.kill")

    def hook(event, args):
        if event.startswith(blocked):
            raise PermissionError("sandbox: " + event + " is not allowed")
        if event == "open" and len(args) >= 2:
            path, mode = args[0], args[1]
            flags = args[2] if len(args) > 2 else 0
            writing = (isinstance(mode, str) and any(c in mode for c in "wax+")) or (
                isinstance(flags, int) and flags & (os.O_WRONLY | os.O_RDWR | os.O_CREAT)
            )
            if writing and isinstance(path, (str, bytes)):
                p = os.path.realpath(os.fsdecode(path))
                if p != root and not p.startswith(root + os.sep):
                    raise PermissionError("sandbox: write outside working directory")

    sys.addaudithook(hook)


def _render(value):
    return json.dumps(value, separators=(",", ":"))


def main():
    with open(CANDIDATE) as f:
        source = f.read()
    try:
        code = compile(source, CANDIDATE, "exec")
    except SyntaxError as e:
        sys.stderr.write("%s: %s (line %s)\n" % (type(e).__name__, e.msg, e.lineno))
        sys.exit(97)
    if len(sys.argv) > 1 and sys.argv[1] == "script":
        _guard(os.getcwd())
        exec(code, {"__name__": "__main__"})
        return
    args, kwargs = _arguments(sys.stdin.read())
    _guard(os.getcwd())
    namespace = {"__name__": "solution"}
    exec(code, namespace)
    cls = namespace.get("Solution")
    if cls is None:
        sys.stderr.write("NameError: class Solution is not defined\n")
        sys.exit(1)
    methods = [n for n, v in vars(cls).items() if callable(v) and not n.startswith("_")]
    if not methods:
        sys.stderr.write("AttributeError: Solution has no public method\n")
        sys.exit(1)
    result = getattr(cls(), methods[0])(*args, **kwargs)
    sys.stdout.write(_render(result) + "\n")


main()
