#!/usr/bin/env python3
"""Regenerates the synthetic suite under data/: worlds, backend scripts, manifest.

Run from anywhere: paths are resolved relative to the repo root. The files are
checked in; rerun this only when changing the suite, then review the diff.
"""

import json
import pathlib

ROOT = pathlib.Path(__file__).resolve().parent.parent
WORLDS = ROOT / "data" / "worlds"
SCRIPTS = ROOT / "data" / "scripts"

REFLECT_KEEP = """Progress signal: steady progress toward the goal
Outcome signal: the last action had a visible effect
Loop signal: no
Feasibility signal: feasible
Termination signal: CONTINUE
Strategy signal: KEEP
Verdict: case 2 — on track"""

MODALITY_KEY = "Switch to a different interaction modality"


def mgr(gate, prev, analysis, nxt, call):
    return (
        "(Completion Gate)\n" + gate +
        "\n\n(Previous Action Verification)\n" + prev +
        "\n\n(Screenshot Analysis)\n" + analysis +
        "\n\n(Next Action)\n" + nxt +
        "\n\n(Grounded Action)\n```\n" + call + "\n```"
    )


def claim(met_lines, analysis, call="agent.done()"):
    gate = "\n".join(met_lines) + "\nDONE"
    return mgr(gate, "The previous action had the intended effect.", analysis,
               "Every criterion is met; declare the task done.", call)


def el(label, x, y, w, h, kind="button", state=""):
    return {"label": label, "x": x, "y": y, "w": w, "h": h, "kind": kind, "state": state}


def write_world(name, world):
    (WORLDS / f"{name}.json").write_text(json.dumps(world, indent=2) + "\n")


def write_script(name, manager_main, overrides, extra=()):
    """overrides: list of (when, [bodies]) checked in listed order (put the
    claim override first so stale markers in history cannot preempt it)."""
    parts = []
    for body in manager_main:
        parts.append("=== role:manager ===\n" + body + "\n")
    for when, bodies in overrides:
        for body in bodies:
            parts.append(f"=== role:manager when:{when} ===\n" + body + "\n")
    parts.append("=== role:reflection ===\n" + REFLECT_KEEP + "\n")
    for role, bodies in extra:
        for body in bodies:
            parts.append(f"=== role:{role} ===\n" + body + "\n")
    (SCRIPTS / f"{name}.script").write_text("".join(parts))


TASKS = []


def task(tid, instruction, tag, budget=50, expected=True):
    TASKS.append({
        "id": tid,
        "world": f"worlds/{tid}.json",
        "script": f"scripts/{tid}.script",
        "instruction": instruction,
        "budget": budget,
        "tag": tag,
        "expected_solvable": expected,
    })


# --- straight family ---------------------------------------------------------

def straight_settings_toggle():
    name = "straight-settings-toggle"
    write_world(name, {
        "name": name,
        "initial": "settings",
        "screens": [{
            "id": "settings",
            "elements": [
                el("Settings header", 40, 20, 300, 40, "text"),
                el("dark mode", 100, 200, 220, 44, "toggle", "off"),
            ],
            "transitions": [],
        }],
        "success": [{
            "element_state": {"screen": "settings", "label": "dark mode", "equals": "on"},
            "desc": "the dark mode toggle must be switched on",
        }],
    })
    write_script(name, [
        mgr("1. The dark mode toggle shows state on.\nCONTINUE",
            "No previous action.",
            "The settings screen shows the dark mode toggle, currently off.",
            "Click the dark mode toggle to switch it on.",
            'agent.click("dark mode", 1, "left")'),
    ], [
        ("dark mode [toggle, state: on]", [
            claim(["1. met: the toggle now shows state on"],
                  "Dark mode is on; the task looks finished."),
        ]),
    ])
    task(name, "Turn on dark mode in the settings.", "straight")


def straight_compose_save():
    name = "straight-compose-save"
    write_world(name, {
        "name": name,
        "initial": "editor",
        "screens": [{
            "id": "editor",
            "elements": [
                el("toolbar", 0, 0, 1920, 40, "text"),
                el("document body", 100, 100, 1200, 700, "field", ""),
            ],
            "transitions": [{
                "on": "ctrl+s", "event": "hotkey",
                "effect": [
                    {"set_flag": "saved"},
                    {"add_element": {"element": el("Saved toast", 1500, 1000, 300, 40, "text")}},
                ],
            }],
        }],
        "success": [
            {"element_state": {"screen": "editor", "label": "document body",
                               "equals": "Quarterly numbers ready"},
             "desc": "the report text must be entered in the document body"},
            {"flag_set": "saved", "desc": "the document must be saved with the save shortcut"},
        ],
    })
    write_script(name, [
        mgr("1. The document body contains the report text.\n"
            "2. A saved toast confirms the document was saved.\nCONTINUE",
            "No previous action.",
            "An empty editor with a document body field.",
            "Type the report text into the document body.",
            'agent.type("document body", "Quarterly numbers ready", 1, 0)'),
    ], [
        ("Saved toast [", [
            claim(["1. met: the document body shows the report text",
                   "2. met: the saved toast is visible"],
                  "The text is in place and the saved toast confirms the save."),
        ]),
        ("state: Quarterly numbers ready", [
            mgr("1. met: the document body shows the report text\n2. unmet\nCONTINUE",
                "The text landed in the document body.",
                "The report text is in the field; nothing is saved yet.",
                "Save with the keyboard shortcut.",
                'agent.hotkey("ctrl", "s")'),
        ]),
    ])
    task(name, "Type 'Quarterly numbers ready' into the document body and save the document.",
         "straight")


def straight_rename_entry():
    name = "straight-rename-entry"
    write_world(name, {
        "name": name,
        "initial": "files",
        "screens": [
            {"id": "files",
             "elements": [
                 el("file list header", 40, 20, 400, 40, "text"),
                 el("report draft", 100, 120, 300, 36, "text"),
             ],
             "transitions": [{
                 "on": "report draft", "event": "double_click",
                 "effect": [{"goto": "rename"}],
             }]},
            {"id": "rename",
             "elements": [
                 el("rename dialog", 600, 300, 700, 50, "text"),
                 el("name box", 620, 380, 600, 40, "field", "report draft"),
             ],
             "transitions": [{
                 "on": "name box", "event": "submit",
                 "effect": [
                     {"remove_element": {"screen": "files", "label": "report draft"}},
                     {"add_element": {"screen": "files",
                                      "element": el("quarterly report", 100, 120, 300, 36,
                                                    "text")}},
                     {"goto": "files"},
                 ],
             }]},
        ],
        "success": [
            {"element_exists": {"screen": "files", "label": "quarterly report"},
             "desc": "an entry named quarterly report must exist in the file list"},
            {"element_absent": {"screen": "files", "label": "report draft"},
             "desc": "the old report draft entry must be gone"},
        ],
    })
    write_script(name, [
        mgr("1. The file list shows an entry named quarterly report.\n"
            "2. The old entry is gone from the list.\nCONTINUE",
            "No previous action.",
            "A file list with a report draft entry.",
            "Open the rename dialog for the draft.",
            'agent.double_click("report draft")'),
    ], [
        ("quarterly report [text]", [
            claim(["1. met: the list shows quarterly report",
                   "2. met: no report draft entry remains"],
                  "The entry was renamed; the list shows the new name only."),
        ]),
        ("name box", [
            mgr("1. unmet\n2. unmet\nCONTINUE",
                "The rename dialog opened.",
                "A rename dialog with a name box holding the old name.",
                "Type the new name and submit it.",
                'agent.type("name box", "quarterly report", 1, 1)'),
        ]),
    ])
    task(name, "Rename the report draft entry to quarterly report.", "straight")


def straight_scroll_reveal():
    name = "straight-scroll-reveal"
    write_world(name, {
        "name": name,
        "initial": "inbox",
        "screens": [
            {"id": "inbox",
             "elements": [
                 el("inbox header", 40, 20, 400, 40, "text"),
                 el("message list", 40, 80, 800, 900, "text"),
             ],
             "transitions": [{
                 "on": "message list", "event": "scroll",
                 "effect": [{"goto": "inbox-bottom"}],
             }]},
            {"id": "inbox-bottom",
             "elements": [
                 el("inbox header", 40, 20, 400, 40, "text"),
                 el("urgent invoice", 40, 600, 800, 40, "button"),
             ],
             "transitions": [{
                 "on": "urgent invoice", "event": "click",
                 "effect": [{"goto": "reading"}],
             }]},
            {"id": "reading",
             "elements": [el("invoice details", 100, 100, 1200, 800, "text")],
             "transitions": []},
        ],
        "success": [{"screen_is": "reading",
                     "desc": "the urgent invoice must be open for reading"}],
    })
    write_script(name, [
        mgr("1. The urgent invoice message is open on screen.\nCONTINUE",
            "No previous action.",
            "The inbox shows a long message list; the urgent item is below the fold.",
            "Scroll the list to reveal the urgent invoice.",
            'agent.scroll("message list", "vertical", 3)'),
    ], [
        ("invoice details", [
            claim(["1. met: the invoice details fill the screen"],
                  "The invoice is open."),
        ]),
        ("urgent invoice [button", [
            mgr("1. unmet\nCONTINUE",
                "Scrolling revealed the urgent invoice.",
                "The urgent invoice entry is now visible.",
                "Open the urgent invoice.",
                'agent.click("urgent invoice", 1, "left")'),
        ]),
    ])
    task(name, "Scroll the message list and open the urgent invoice.", "straight")


def straight_coder_report():
    name = "straight-coder-report"
    write_world(name, {
        "name": name,
        "initial": "jobs",
        "screens": [{
            "id": "jobs",
            "elements": [
                el("job: nightly report", 40, 100, 500, 40, "text"),
                el("mark complete", 600, 100, 200, 40, "toggle", "off"),
            ],
            "transitions": [],
        }],
        "success": [{
            "element_state": {"screen": "jobs", "label": "mark complete", "equals": "on"},
            "desc": "the job must be marked complete in the tracker",
        }],
    })
    write_script(name, [
        mgr("1. The mark complete toggle shows state on.\nCONTINUE",
            "No previous action.",
            "A job tracker with the nightly report job unmarked.",
            "Have the coding agent produce the report file first.",
            'agent.call_code_agent("create report.txt containing the word DONE")'),
        mgr("1. unmet\nCONTINUE",
            "The coding agent reported the file was written.",
            "The tracker still shows the job unmarked.",
            "Mark the job complete.",
            'agent.click("mark complete", 1, "left")'),
    ], [
        ("mark complete [toggle, state: on]", [
            claim(["1. met: the toggle shows state on"],
                  "The job is marked complete."),
        ]),
    ], extra=[
        ("coder", ["```\nprintf 'DONE' > report.txt\n```",
                   "REPORT: wrote report.txt containing DONE"]),
    ])
    task(name, "Use the coding agent to create report.txt containing DONE, "
               "then mark the nightly report job complete.", "straight")


def straight_long_chain():
    name = "straight-long-chain"
    screens = []
    for i in range(1, 21):
        sid = f"c{i:02d}"
        if i < 20:
            screens.append({
                "id": sid,
                "elements": [
                    el(f"stage {sid}", 40, 40, 400, 40, "text"),
                    el("Next", 1700, 1000, 160, 44, "button"),
                ],
                "transitions": [{"on": "Next", "event": "click",
                                 "effect": [{"goto": f"c{i + 1:02d}"}]}],
            })
        else:
            screens.append({
                "id": sid,
                "elements": [el("Finish line reached", 600, 400, 700, 60, "text")],
                "transitions": [],
            })
    write_world(name, {
        "name": name,
        "initial": "c01",
        "screens": screens,
        "success": [{"screen_is": "c20",
                     "desc": "the wizard must reach its final stage"}],
    })
    write_script(name, [
        mgr("1. The finish banner of the wizard is shown.\nCONTINUE",
            "No previous action.",
            "The wizard sits on an early stage with a Next button.",
            "Advance to the next stage.",
            'agent.click("Next", 1, "left")'),
        mgr("1. unmet\nCONTINUE",
            "The wizard advanced one stage.",
            "Still an intermediate stage with a Next button.",
            "Keep advancing.",
            'agent.click("Next", 1, "left")'),
    ], [
        ("Finish line reached", [
            claim(["1. met: the finish banner is on screen"],
                  "The wizard reached its final stage."),
        ]),
    ])
    task(name, "Walk the setup wizard to the finish screen by clicking Next on every stage.",
         "straight")


def straight_export_wait():
    name = "straight-export-wait"
    write_world(name, {
        "name": name,
        "initial": "compose",
        "screens": [
            {"id": "compose",
             "elements": [
                 el("slide deck", 40, 80, 1200, 800, "text"),
                 el("Export", 1700, 1000, 160, 44, "button"),
             ],
             "transitions": [{"on": "Export", "event": "click",
                              "effect": [{"goto": "exporting"}]}]},
            {"id": "exporting",
             "stable": False,
             "elements": [el("Exporting spinner", 860, 500, 200, 80, "text")],
             "transitions": [{"on": "*", "event": "wait",
                              "effect": [{"goto": "exported"}]}]},
            {"id": "exported",
             "elements": [el("Export complete banner", 600, 400, 700, 60, "text")],
             "transitions": []},
        ],
        "success": [{"screen_is": "exported",
                     "desc": "the deck export must run to completion"}],
    })
    write_script(name, [
        mgr("1. The export-complete banner is shown.\nCONTINUE",
            "No previous action.",
            "A slide deck with an Export button.",
            "Start the export.",
            'agent.click("Export", 1, "left")'),
    ], [
        ("Export complete banner", [
            claim(["1. met: the export-complete banner is on screen"],
                  "The export finished."),
        ]),
        ("Exporting spinner", [
            mgr("1. unmet\nCONTINUE",
                "The export started; a spinner is up.",
                "The screen is busy exporting and not yet settled.",
                "Give the export a moment to finish.",
                "agent.wait(1)"),
        ]),
    ])
    task(name, "Export the slide deck and wait for the export to finish.", "straight")


# --- trap family -------------------------------------------------------------

def trap_menu_click():
    name = "trap-menu-click"
    write_world(name, {
        "name": name,
        "initial": "editor",
        "traps": ["File menu"],
        "screens": [
            {"id": "editor",
             "elements": [
                 el("File menu", 20, 10, 120, 30, "menu"),
                 el("editor canvas", 40, 80, 1600, 900, "text"),
             ],
             "transitions": [{"on": "ctrl+o", "event": "hotkey",
                              "effect": [{"goto": "open-dialog"}]}]},
            {"id": "open-dialog",
             "elements": [
                 el("file chooser", 500, 300, 900, 400, "text"),
                 el("Confirm open", 1200, 740, 180, 44, "button"),
             ],
             "transitions": [{"on": "Confirm open", "event": "click",
                              "effect": [{"goto": "document-open"}]}]},
            {"id": "document-open",
             "elements": [el("report content", 100, 100, 1400, 800, "text")],
             "transitions": []},
        ],
        "success": [{"screen_is": "document-open",
                     "desc": "the report document must be open"}],
    })
    trap_click = mgr(
        "1. unmet\nCONTINUE",
        "The menu did not react.",
        "An editor with a File menu that is not responding.",
        "Try the File menu to open the document.",
        'agent.click("File menu", 1, "left")')
    first = mgr(
        "1. The report document is open on screen.\nCONTINUE",
        "No previous action.",
        "An editor with a File menu.",
        "Open the document via the File menu.",
        'agent.click("File menu", 1, "left")')
    write_script(name, [first, trap_click], [
        ("report content", [
            claim(["1. met: the report content is on screen"],
                  "The document opened."),
        ]),
        ("Confirm open", [
            mgr("1. unmet\nCONTINUE",
                "The open dialog appeared after the shortcut.",
                "A file chooser with a Confirm open button.",
                "Confirm opening the document.",
                'agent.click("Confirm open", 1, "left")'),
        ]),
        (MODALITY_KEY, [
            mgr("1. unmet\nCONTINUE",
                "Clicking the menu twice changed nothing; it is blacklisted now.",
                "The editor is unchanged.",
                "Switch modality: use the keyboard shortcut to open.",
                'agent.hotkey("ctrl", "o")'),
        ]),
    ])
    task(name, "Open the report document in the editor.", "trap")


def trap_dialog_ok():
    name = "trap-dialog-ok"
    write_world(name, {
        "name": name,
        "initial": "popup",
        "traps": ["OK button"],
        "screens": [
            {"id": "popup",
             "elements": [
                 el("Update available dialog", 600, 300, 700, 200, "text"),
                 el("OK button", 900, 540, 120, 40, "button"),
             ],
             "transitions": [{"on": "escape", "event": "hotkey",
                              "effect": [{"goto": "desktop"}]}]},
            {"id": "desktop",
             "elements": [
                 el("desktop ready", 40, 40, 400, 40, "text"),
                 el("status bar", 0, 1040, 1920, 40, "text"),
             ],
             "transitions": []},
        ],
        "success": [{"screen_is": "desktop",
                     "desc": "the update dialog must be dismissed"}],
    })
    trap_click = mgr(
        "1. unmet\nCONTINUE",
        "The dialog is still up.",
        "An update dialog with an OK button that does nothing.",
        "Dismiss the dialog with OK.",
        'agent.click("OK button", 1, "left")')
    first = mgr(
        "1. The desktop is visible with no dialog.\nCONTINUE",
        "No previous action.",
        "An update dialog covers the desktop.",
        "Dismiss it with the OK button.",
        'agent.click("OK button", 1, "left")')
    write_script(name, [first, trap_click], [
        ("desktop ready", [
            claim(["1. met: the desktop is visible and the dialog is gone"],
                  "The dialog is dismissed."),
        ]),
        (MODALITY_KEY, [
            mgr("1. unmet\nCONTINUE",
                "OK is unresponsive and now blacklisted.",
                "The dialog is still covering the desktop.",
                "Switch modality: dismiss it from the keyboard.",
                'agent.hotkey("escape")'),
        ]),
    ])
    task(name, "Dismiss the update dialog to reach the desktop.", "trap")


def trap_toggle_flap():
    name = "trap-toggle-flap"
    write_world(name, {
        "name": name,
        "initial": "network",
        "traps": ["wifi switch"],
        "screens": [
            {"id": "network",
             "elements": [
                 el("network panel", 40, 20, 400, 40, "text"),
                 el("wifi switch", 100, 200, 220, 44, "toggle", "off"),
             ],
             "transitions": [{"on": "network settings", "event": "open",
                              "effect": [{"goto": "advanced"}]}]},
            {"id": "advanced",
             "elements": [
                 el("advanced panel", 40, 20, 400, 40, "text"),
                 el("enable radio", 100, 300, 220, 44, "button"),
             ],
             "transitions": [{"on": "enable radio", "event": "click",
                              "effect": [
                                  {"set_state": {"screen": "network", "label": "wifi switch",
                                                 "state": "on"}},
                                  {"goto": "network"},
                              ]}]},
        ],
        "success": [{
            "element_state": {"screen": "network", "label": "wifi switch", "equals": "on"},
            "desc": "the wifi switch must end up on",
        }],
    })
    trap_click = mgr(
        "1. unmet\nCONTINUE",
        "The switch did not move.",
        "The network panel with an unresponsive wifi switch.",
        "Flip the wifi switch.",
        'agent.click("wifi switch", 1, "left")')
    first = mgr(
        "1. The wifi switch shows state on.\nCONTINUE",
        "No previous action.",
        "A network panel with the wifi switch off.",
        "Flip the wifi switch on.",
        'agent.click("wifi switch", 1, "left")')
    write_script(name, [first, trap_click], [
        ("wifi switch [toggle, state: on]", [
            claim(["1. met: the wifi switch shows state on"],
                  "Wifi is enabled."),
        ]),
        ("enable radio", [
            mgr("1. unmet\nCONTINUE",
                "The advanced panel opened.",
                "An advanced panel with an enable radio button.",
                "Enable the radio from here.",
                'agent.click("enable radio", 1, "left")'),
        ]),
        (MODALITY_KEY, [
            mgr("1. unmet\nCONTINUE",
                "The switch ignored two clicks and is blacklisted.",
                "The network panel is unchanged.",
                "Switch modality: open the advanced settings app instead.",
                'agent.open("network settings")'),
        ]),
    ])
    task(name, "Turn the wifi switch on.", "trap")


def trap_save_button():
    name = "trap-save-button"
    write_world(name, {
        "name": name,
        "initial": "editor",
        "traps": ["Save button"],
        "screens": [{
            "id": "editor",
            "elements": [
                el("draft banner", 40, 20, 400, 40, "text"),
                el("Save button", 1700, 1000, 160, 44, "button"),
            ],
            "transitions": [{"on": "ctrl+s", "event": "hotkey",
                             "effect": [
                                 {"set_flag": "saved"},
                                 {"add_element": {"element": el("Saved toast", 1500, 940, 300,
                                                                40, "text")}},
                             ]}],
        }],
        "success": [{"flag_set": "saved",
                     "desc": "the document must be saved"}],
    })
    trap_click = mgr(
        "1. unmet\nCONTINUE",
        "No save confirmation appeared.",
        "The editor still shows only the draft banner.",
        "Press the Save button.",
        'agent.click("Save button", 1, "left")')
    first = mgr(
        "1. A saved toast confirms the document was saved.\nCONTINUE",
        "No previous action.",
        "An editor with an unsaved draft and a Save button.",
        "Save via the Save button.",
        'agent.click("Save button", 1, "left")')
    write_script(name, [first, trap_click], [
        ("Saved toast [", [
            claim(["1. met: the saved toast is visible"],
                  "The save went through."),
        ]),
        (MODALITY_KEY, [
            mgr("1. unmet\nCONTINUE",
                "The Save button swallowed two clicks and is blacklisted.",
                "Still no save confirmation.",
                "Switch modality: save from the keyboard.",
                'agent.hotkey("ctrl", "s")'),
        ]),
    ])
    task(name, "Save the current document.", "trap")


def trap_search_box():
    name = "trap-search-box"
    write_world(name, {
        "name": name,
        "initial": "library",
        "traps": ["search box"],
        "screens": [
            {"id": "library",
             "elements": [
                 el("library shelf", 40, 80, 1200, 800, "text"),
                 el("search box", 1400, 20, 400, 40, "field", ""),
             ],
             "transitions": [{"on": "ctrl&k", "event": "hold_press",
                              "effect": [{"goto": "results"}]}]},
            {"id": "results",
             "elements": [
                 el("results pane", 40, 20, 400, 40, "text"),
                 el("first result", 40, 100, 800, 40, "button"),
             ],
             "transitions": [{"on": "first result", "event": "click",
                              "effect": [{"goto": "item-view"}]}]},
            {"id": "item-view",
             "elements": [el("item details", 100, 100, 1200, 800, "text")],
             "transitions": []},
        ],
        "success": [{"screen_is": "item-view",
                     "desc": "the ancient maps item must be open"}],
    })
    trap_type = mgr(
        "1. unmet\nCONTINUE",
        "The search box did not take the text.",
        "The library view with a dead search box.",
        "Search for the item.",
        'agent.type("search box", "ancient maps", 0, 0)')
    first = mgr(
        "1. The ancient maps item is open.\nCONTINUE",
        "No previous action.",
        "A library view with a search box.",
        "Type the query into the search box.",
        'agent.type("search box", "ancient maps", 0, 0)')
    write_script(name, [first, trap_type], [
        ("item details", [
            claim(["1. met: the item details are on screen"],
                  "The item is open."),
        ]),
        ("first result", [
            mgr("1. unmet\nCONTINUE",
                "The quick-search results opened.",
                "A results pane listing the item.",
                "Open the first result.",
                'agent.click("first result", 1, "left")'),
        ]),
        (MODALITY_KEY, [
            mgr("1. unmet\nCONTINUE",
                "Typing into the box did nothing twice; it is blacklisted.",
                "The library view is unchanged.",
                "Switch modality: use the quick-search chord.",
                'agent.hold_and_press("ctrl", "k")'),
        ]),
    ])
    task(name, "Find and open the ancient maps item in the library.", "trap")


# --- premature-done family ---------------------------------------------------

def premature(name, instruction, world, first_body, premature_claim, fix_key, fix_body,
              final_key, final_claim_body):
    write_world(name, world)
    write_script(name, [first_body, premature_claim], [
        (final_key, [final_claim_body]),
        (fix_key, [fix_body]),
    ])
    task(name, instruction, "premature")


def premature_form_submit():
    name = "premature-form-submit"
    world = {
        "name": name,
        "initial": "form",
        "screens": [{
            "id": "form",
            "elements": [
                el("signup form", 40, 20, 400, 40, "text"),
                el("email entry", 100, 200, 500, 40, "field", ""),
                el("Submit", 100, 300, 160, 44, "button"),
            ],
            "transitions": [{"on": "Submit", "event": "click",
                             "effect": [
                                 {"set_flag": "submitted"},
                                 {"add_element": {"element": el("Submission received banner",
                                                                100, 400, 500, 40, "text")}},
                             ]}],
        }],
        "success": [
            {"element_state": {"screen": "form", "label": "email entry",
                               "equals": "ada@example.com"},
             "desc": "the email address must be filled in"},
            {"flag_set": "submitted",
             "desc": "the form must actually be submitted to the server"},
        ],
    }
    first = mgr(
        "1. The email entry shows the address.\n"
        "2. The submission received banner is shown.\nCONTINUE",
        "No previous action.",
        "A signup form with an empty email entry.",
        "Fill in the email address.",
        'agent.type("email entry", "ada@example.com", 1, 0)')
    premature_claim = claim(
        ["1. met: the field shows ada@example.com",
         "2. met: the submission banner appeared"],
        "The form looks filled in and finished.")
    fix = mgr(
        "1. met: the field shows ada@example.com\n2. unmet\nCONTINUE",
        "The claim was rejected: the form was never submitted.",
        "The form is filled but the banner is missing.",
        "Actually press Submit.",
        'agent.click("Submit", 1, "left")')
    final = claim(
        ["1. met: the field shows ada@example.com",
         "2. met: the submission received banner is visible"],
        "The form is filled and the submission banner confirms it went through.")
    premature(name, "Enter ada@example.com into the signup form and submit it.", world,
              first, premature_claim, "actually be submitted to the server", fix,
              "Submission received banner [", final)


def premature_doc_save():
    name = "premature-doc-save"
    world = {
        "name": name,
        "initial": "notes",
        "screens": [{
            "id": "notes",
            "elements": [
                el("notes app", 40, 20, 400, 40, "text"),
                el("note body", 100, 100, 1200, 700, "field", ""),
            ],
            "transitions": [{"on": "ctrl+s", "event": "hotkey",
                             "effect": [
                                 {"set_flag": "saved"},
                                 {"add_element": {"element": el("Saved toast", 1500, 1000, 300,
                                                                40, "text")}},
                             ]}],
        }],
        "success": [
            {"element_state": {"screen": "notes", "label": "note body",
                               "equals": "Meeting at noon"},
             "desc": "the note text must be entered"},
            {"flag_set": "saved",
             "desc": "the note must be saved with the save shortcut"},
        ],
    }
    first = mgr(
        "1. The note body shows the meeting text.\n"
        "2. A saved toast confirms the note was saved.\nCONTINUE",
        "No previous action.",
        "An empty note body.",
        "Type the note text.",
        'agent.type("note body", "Meeting at noon", 1, 0)')
    premature_claim = claim(
        ["1. met: the note body shows the meeting text",
         "2. met: the note was saved"],
        "The note looks complete.")
    fix = mgr(
        "1. met: the note body shows the meeting text\n2. unmet\nCONTINUE",
        "The claim was rejected: nothing was saved yet.",
        "The text is there but no saved toast.",
        "Save with the shortcut.",
        'agent.hotkey("ctrl", "s")')
    final = claim(
        ["1. met: the note body shows the meeting text",
         "2. met: the saved toast is visible"],
        "The note is written and saved.")
    premature(name, "Write 'Meeting at noon' in the note and save your work.", world,
              first, premature_claim, "must be saved with the save shortcut", fix,
              "Saved toast [", final)


def premature_settings_apply():
    name = "premature-settings-apply"
    world = {
        "name": name,
        "initial": "prefs",
        "screens": [{
            "id": "prefs",
            "elements": [
                el("preferences pane", 40, 20, 400, 40, "text"),
                el("notifications", 100, 200, 220, 44, "toggle", "off"),
                el("Apply", 100, 320, 160, 44, "button"),
            ],
            "transitions": [{"on": "Apply", "event": "click",
                             "effect": [
                                 {"set_flag": "applied"},
                                 {"add_element": {"element": el("Preferences applied banner",
                                                                100, 420, 500, 40, "text")}},
                             ]}],
        }],
        "success": [
            {"element_state": {"screen": "prefs", "label": "notifications", "equals": "on"},
             "desc": "the notifications toggle must be on"},
            {"flag_set": "applied",
             "desc": "the apply button must be pressed to persist the change"},
        ],
    }
    first = mgr(
        "1. The notifications toggle shows state on.\n"
        "2. The applied banner confirms the change persisted.\nCONTINUE",
        "No previous action.",
        "A preferences pane with notifications off.",
        "Flip the notifications toggle.",
        'agent.click("notifications", 1, "left")')
    premature_claim = claim(
        ["1. met: the toggle shows state on",
         "2. met: the change is applied"],
        "The toggle is on; this looks done.")
    fix = mgr(
        "1. met: the toggle shows state on\n2. unmet\nCONTINUE",
        "The claim was rejected: the change was never applied.",
        "The toggle is on but no applied banner is shown.",
        "Press Apply to persist it.",
        'agent.click("Apply", 1, "left")')
    final = claim(
        ["1. met: the toggle shows state on",
         "2. met: the applied banner is visible"],
        "The change is applied and persisted.")
    premature(name, "Turn on notifications and apply the change.", world,
              first, premature_claim, "apply button must be pressed", fix,
              "Preferences applied banner [", final)


def premature_upload_confirm():
    name = "premature-upload-confirm"
    world = {
        "name": name,
        "initial": "upload",
        "screens": [{
            "id": "upload",
            "elements": [
                el("upload manager", 40, 20, 400, 40, "text"),
                el("holiday.jpg", 100, 120, 260, 36, "text"),
                el("upload zone", 900, 120, 400, 300, "text"),
                el("Start upload", 900, 460, 200, 44, "button"),
            ],
            "transitions": [
                {"on": "holiday.jpg", "event": "drag", "dst": "upload zone",
                 "effect": [
                     {"remove_element": {"label": "holiday.jpg"}},
                     {"add_element": {"element": el("1 file staged", 900, 430, 200, 24,
                                                    "text")}},
                 ]},
                {"on": "Start upload", "event": "click",
                 "effect": [
                     {"set_flag": "uploaded"},
                     {"add_element": {"element": el("Upload finished banner", 900, 520, 400,
                                                    40, "text")}},
                 ]},
            ],
        }],
        "success": [
            {"element_absent": {"screen": "upload", "label": "holiday.jpg"},
             "desc": "the photo must be staged into the upload zone"},
            {"flag_set": "uploaded",
             "desc": "the start upload button must be clicked to transfer the file"},
        ],
    }
    first = mgr(
        "1. The photo is staged in the upload zone.\n"
        "2. The upload finished banner is shown.\nCONTINUE",
        "No previous action.",
        "An upload manager with holiday.jpg and an empty upload zone.",
        "Stage the photo by dragging it into the zone.",
        'agent.drag_and_drop("holiday.jpg", "upload zone")')
    premature_claim = claim(
        ["1. met: the zone shows one staged file",
         "2. met: the upload ran"],
        "The photo is staged; this looks finished.")
    fix = mgr(
        "1. met: the zone shows one staged file\n2. unmet\nCONTINUE",
        "The claim was rejected: the upload never started.",
        "The file is staged but not transferred.",
        "Start the upload.",
        'agent.click("Start upload", 1, "left")')
    final = claim(
        ["1. met: the zone shows one staged file",
         "2. met: the upload finished banner is visible"],
        "The upload completed.")
    premature(name, "Stage holiday.jpg and run the upload.", world,
              first, premature_claim, "start upload button must be clicked", fix,
              "Upload finished banner [", final)


def premature_wizard_finish():
    name = "premature-wizard-finish"
    world = {
        "name": name,
        "initial": "wizard-start",
        "screens": [
            {"id": "wizard-start",
             "elements": [
                 el("step one form", 40, 40, 800, 600, "text"),
                 el("Next", 1700, 1000, 160, 44, "button"),
             ],
             "transitions": [{"on": "Next", "event": "click",
                              "effect": [{"goto": "wizard-summary"}]}]},
            {"id": "wizard-summary",
             "elements": [
                 el("summary view", 40, 40, 800, 600, "text"),
                 el("Finish", 1700, 1000, 160, 44, "button"),
             ],
             "transitions": [{"on": "Finish", "event": "click",
                              "effect": [
                                  {"set_flag": "finished"},
                                  {"add_element": {"element": el("Setup complete banner", 600,
                                                                 400, 700, 60, "text")}},
                              ]}]},
        ],
        "success": [
            {"screen_is": "wizard-summary",
             "desc": "the wizard must be on the summary page"},
            {"flag_set": "finished",
             "desc": "the finish button must be pressed to commit the setup"},
        ],
    }
    first = mgr(
        "1. The wizard shows its summary page.\n"
        "2. The setup complete banner is shown.\nCONTINUE",
        "No previous action.",
        "The wizard is on its first step.",
        "Advance to the summary.",
        'agent.click("Next", 1, "left")')
    premature_claim = claim(
        ["1. met: the summary page is shown",
         "2. met: the setup is committed"],
        "The summary is up; this looks done.")
    fix = mgr(
        "1. met: the summary page is shown\n2. unmet\nCONTINUE",
        "The claim was rejected: the setup was never committed.",
        "The summary is shown but Finish was never pressed.",
        "Press Finish.",
        'agent.click("Finish", 1, "left")')
    final = claim(
        ["1. met: the summary page is shown",
         "2. met: the setup complete banner is visible"],
        "The setup is committed.")
    premature(name, "Complete the setup wizard.", world,
              first, premature_claim, "finish button must be pressed", fix,
              "Setup complete banner [", final)


# --- search-dependent family -------------------------------------------------

def search_world(name, instruction, screen_id, field_label, decoration, secret, wrong,
                 search_text, search_key):
    write_world(name, {
        "name": name,
        "initial": screen_id,
        "screens": [{
            "id": screen_id,
            "elements": [
                el(decoration, 40, 20, 400, 40, "text"),
                el(field_label, 100, 200, 500, 40, "field", ""),
            ],
            "transitions": [],
        }],
        "success": [{
            "element_state": {"screen": screen_id, "label": field_label, "equals": secret},
            "desc": f"the correct value must be entered in the {field_label}",
        }],
    })
    first = mgr(
        f"1. The {field_label} shows the correct value.\nCONTINUE",
        "No previous action.",
        f"A {decoration} screen asking for a value not shown anywhere.",
        "Look the value up first.",
        f'agent.call_search_agent("{instruction}")')
    guess = mgr(
        "1. unmet\nCONTINUE",
        "Still no authoritative value; guessing.",
        f"The {field_label} is waiting for input.",
        "Try a guess.",
        f'agent.type("{field_label}", "{wrong}", 1, 0)')
    write_script(name, [first, guess], [
        (f"state: {secret}", [
            claim([f"1. met: the {field_label} shows {secret}"],
                  "The correct value is entered."),
        ]),
        (search_key, [
            mgr("1. unmet\nCONTINUE",
                "The lookup returned the exact value.",
                f"The {field_label} is still empty.",
                "Enter the value from the lookup.",
                f'agent.type("{field_label}", "{secret}", 1, 0)'),
        ]),
    ], extra=[("search", [search_text])])
    task(name, instruction, "search")


def search_unlock_code():
    search_world(
        "search-unlock-code",
        "Find the practice vault's unlock code and enter it.",
        "vault", "code entry", "vault door",
        "7319", "0000",
        "For this practice drill the unlock code is 7319. Type it into the code entry field.",
        "unlock code is 7319")


def search_license_key():
    search_world(
        "search-license-key",
        "Find the trial license key and enter it to activate.",
        "activation", "license field", "activation wizard",
        "AB-900", "TRIAL-1",
        "The published trial license key is AB-900. Paste it into the license field.",
        "license key is AB-900")


def search_wifi_password():
    name = "search-wifi-password"
    write_world(name, {
        "name": name,
        "initial": "wifi",
        "screens": [{
            "id": "wifi",
            "elements": [
                el("guest network panel", 40, 20, 400, 40, "text"),
                el("passphrase box", 100, 200, 500, 40, "field", ""),
                el("Connect", 100, 300, 160, 44, "button"),
            ],
            "transitions": [{"on": "Connect", "event": "click",
                             "effect": [
                                 {"set_flag": "connected"},
                                 {"add_element": {"element": el("Connected banner", 100, 400,
                                                                500, 40, "text")}},
                             ]}],
        }],
        "success": [
            {"element_state": {"screen": "wifi", "label": "passphrase box",
                               "equals": "hunter42"},
             "desc": "the correct passphrase must be entered"},
            {"flag_set": "connected",
             "desc": "the connect button must be pressed"},
        ],
    })
    first = mgr(
        "1. The passphrase box shows the correct passphrase.\n"
        "2. The connected banner is shown.\nCONTINUE",
        "No previous action.",
        "A guest network panel asking for a passphrase that is not displayed.",
        "Look the passphrase up first.",
        'agent.call_search_agent("What is the guest network passphrase?")')
    guess = mgr(
        "1. unmet\n2. unmet\nCONTINUE",
        "No passphrase found; guessing.",
        "The passphrase box is empty.",
        "Try a common guess.",
        'agent.type("passphrase box", "guest123", 1, 0)')
    connect = mgr(
        "1. met: the box has a passphrase\n2. unmet\nCONTINUE",
        "A passphrase is entered.",
        "The panel is ready to connect.",
        "Press Connect.",
        'agent.click("Connect", 1, "left")')
    final = claim(
        ["1. met: the passphrase box is filled in",
         "2. met: the connected banner is visible"],
        "Connected to the guest network.")
    write_script(name, [first, guess, connect, final], [
        ("Connected banner [", [final]),
        ("passphrase is hunter42", [
            mgr("1. unmet\n2. unmet\nCONTINUE",
                "The lookup returned the passphrase.",
                "The passphrase box is still empty.",
                "Enter the passphrase from the lookup.",
                'agent.type("passphrase box", "hunter42", 1, 0)'),
            connect,
        ]),
    ], extra=[("search", [
        "The guest network passphrase is hunter42. Enter it and press Connect.",
    ])])
    task(name, "Find the guest wifi passphrase and connect.", "search")


def main():
    WORLDS.mkdir(parents=True, exist_ok=True)
    SCRIPTS.mkdir(parents=True, exist_ok=True)

    straight_settings_toggle()
    straight_compose_save()
    straight_rename_entry()
    straight_scroll_reveal()
    straight_coder_report()
    straight_long_chain()
    straight_export_wait()

    trap_menu_click()
    trap_dialog_ok()
    trap_toggle_flap()
    trap_save_button()
    trap_search_box()

    premature_form_submit()
    premature_doc_save()
    premature_settings_apply()
    premature_upload_confirm()
    premature_wizard_finish()

    search_unlock_code()
    search_license_key()
    search_wifi_password()

    manifest = {"tasks": TASKS}
    (ROOT / "data" / "suite.json").write_text(json.dumps(manifest, indent=2) + "\n")
    print(f"wrote {len(TASKS)} tasks")


if __name__ == "__main__":
    main()
