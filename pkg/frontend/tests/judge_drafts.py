"""Service-side verdicts for fuzzed config drafts.

Modes:
    templates  -- print the built-in template documents as JSON
    judge      -- read a JSON list of config documents on stdin and print,
                  per draft, either the violation triples found by the
                  service validator or the sentinel {"malformed": <reason>}
                  when the document does not even parse as a config.
"""

import json
import sys

from acclab.scheme import (
    ConfigDocumentError,
    builtin_templates,
    config_from_doc,
    template_to_doc,
    validate_config,
)


def main() -> int:
    mode = sys.argv[1] if len(sys.argv) > 1 else "judge"
    templates = {t.template_id: t for t in builtin_templates()}

    if mode == "templates":
        json.dump([template_to_doc(t) for t in templates.values()], sys.stdout)
        return 0

    verdicts = []
    for doc in json.load(sys.stdin):
        try:
            config = config_from_doc(doc)
        except ConfigDocumentError as exc:
            verdicts.append({"malformed": str(exc)})
            continue
        template = templates[config.template_id]
        verdicts.append([[v.slot, v.param, v.reason]
                         for v in validate_config(template, config)])
    json.dump(verdicts, sys.stdout)
    return 0


if __name__ == "__main__":
    sys.exit(main())
