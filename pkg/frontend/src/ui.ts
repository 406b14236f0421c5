// DOM wiring: solid list, thumbnail gallery with vote badges, keyboard
// navigation, full-size modal with overlay toggle, and the pre-export
// review screen.

import { ApiError, CurationApi, ViewInfo } from "./api.js";
import {
  SessionState,
  applyOptimistic,
  canVote,
  effectiveVotes,
  initialState,
  moveCursor,
  openSolid,
  refreshViews,
  revertOptimistic,
  reviewSummary,
  selectVoter,
  voteBadge,
} from "./session.js";

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing #${id}`);
  return node as T;
}

export class CurationApp {
  private state: SessionState = initialState();
  private banner = el<HTMLDivElement>("banner");

  constructor(private readonly api: CurationApi) {}

  async start(): Promise<void> {
    try {
      const config = await this.api.config();
      this.state = { ...this.state, roster: config.roster };
      this.renderVoterSelect();
      await this.reloadSolids();
      this.bindKeyboard();
      this.bindReviewButton();
    } catch (err) {
      this.showBanner(`service unreachable: ${describe(err)}`, true);
    }
  }

  private showBanner(message: string, isError: boolean): void {
    this.banner.textContent = message;
    this.banner.className = isError ? "banner error" : "banner";
    this.banner.hidden = message === "";
  }

  private renderVoterSelect(): void {
    const select = el<HTMLSelectElement>("voter");
    select.innerHTML =
      `<option value="">choose voter...</option>` +
      this.state.roster.map((v) => `<option value="${v}">${v}</option>`).join("");
    select.onchange = () => {
      this.state = selectVoter(this.state, select.value);
      this.renderGallery();
    };
  }

  private async reloadSolids(): Promise<void> {
    const solids = await this.api.solids();
    this.state = { ...this.state, solids };
    const list = el<HTMLUListElement>("solids");
    list.innerHTML = "";
    for (const solid of solids) {
      const item = document.createElement("li");
      item.textContent = `solid ${solid.solid_id} (${solid.kept_count}/${solid.view_count} kept)`;
      item.className = solid.solid_id === this.state.currentSolid ? "active" : "";
      item.onclick = () => void this.showSolid(solid.solid_id);
      list.appendChild(item);
    }
    if (solids.length === 0) {
      list.innerHTML = "<li class='empty'>no solids in the dataset</li>";
    }
  }

  private async showSolid(solidId: number): Promise<void> {
    const views = await this.api.views(solidId);
    this.state = openSolid(this.state, solidId, views);
    await this.reloadSolids();
    this.renderGallery();
  }

  private async refreshCurrentViews(): Promise<void> {
    if (this.state.currentSolid === null) return;
    const views = await this.api.views(this.state.currentSolid);
    this.state = refreshViews(this.state, views);
    await this.reloadSolids();
    this.renderGallery();
  }

  private renderGallery(): void {
    const gallery = el<HTMLDivElement>("gallery");
    gallery.innerHTML = "";
    if (this.state.currentSolid === null) {
      gallery.innerHTML = "<p class='empty'>pick a solid on the left</p>";
      return;
    }
    this.state.views.forEach((view, index) => {
      gallery.appendChild(this.renderCard(view, index));
    });
  }

  private renderCard(view: ViewInfo, index: number): HTMLElement {
    const card = document.createElement("div");
    card.className = "card" + (index === this.state.viewIndex ? " cursor" : "");
    card.dataset.viewId = view.view_id;

    const img = document.createElement("img");
    img.loading = "lazy"; // thumbnails lazy-load
    img.src = this.api.imageUrl(view.view_id, false);
    img.alt = view.view_id;
    img.onclick = () => this.openModal(view);
    card.appendChild(img);

    const votes = effectiveVotes(this.state, view);
    const badge = document.createElement("div");
    badge.className = "badge";
    badge.textContent = `${view.view_id}  ${voteBadge(this.state, view)}`;
    for (const [voter, keep] of Object.entries(votes)) {
      const mark = document.createElement("span");
      mark.className = keep ? "keep" : "discard";
      mark.title = voter;
      mark.textContent = keep ? "K" : "D";
      badge.appendChild(mark);
    }
    card.appendChild(badge);

    const buttons = document.createElement("div");
    buttons.className = "actions";
    for (const keep of [true, false]) {
      const button = document.createElement("button");
      button.textContent = keep ? "keep" : "discard";
      button.disabled = !canVote(this.state);
      button.onclick = () => void this.vote(view.view_id, keep);
      buttons.appendChild(button);
    }
    card.appendChild(buttons);
    return card;
  }

  private async vote(viewId: string, keep: boolean): Promise<void> {
    const voter = this.state.voter;
    if (!canVote(this.state) || voter === null) {
      this.showBanner("select a voter first", true);
      return;
    }
    this.state = applyOptimistic(this.state, viewId, keep);
    this.renderGallery();
    try {
      const ack = await this.api.castVote(viewId, voter, keep);
      if (ack.warning) this.showBanner(ack.warning, false);
      await this.refreshCurrentViews(); // server truth wins
    } catch (err) {
      this.state = revertOptimistic(this.state, viewId);
      this.renderGallery();
      this.showBanner(`vote rejected: ${describe(err)}`, true);
    }
  }

  private bindKeyboard(): void {
    document.addEventListener("keydown", (event) => {
      if (event.target instanceof HTMLSelectElement) return;
      if (event.key === "ArrowRight") this.state = moveCursor(this.state, 1);
      else if (event.key === "ArrowLeft") this.state = moveCursor(this.state, -1);
      else if (event.key === "k" || event.key === "d") {
        const view = this.state.views[this.state.viewIndex];
        if (view) void this.vote(view.view_id, event.key === "k");
        return;
      } else return;
      this.renderGallery();
      document.querySelector(".card.cursor")?.scrollIntoView({ block: "nearest" });
    });
  }

  private openModal(view: ViewInfo): void {
    const modal = el<HTMLDivElement>("modal");
    const img = el<HTMLImageElement>("modal-image");
    const overlayToggle = el<HTMLInputElement>("modal-overlay");
    const update = () => {
      img.src = this.api.imageUrl(view.view_id, overlayToggle.checked);
    };
    overlayToggle.onchange = update;
    update();
    modal.hidden = false;
    el<HTMLButtonElement>("modal-close").onclick = () => (modal.hidden = true);
  }

  private bindReviewButton(): void {
    el<HTMLButtonElement>("show-review").onclick = () => void this.renderReview();
    el<HTMLButtonElement>("do-export").onclick = () => void this.runExport();
  }

  private async renderReview(): Promise<void> {
    const solids = await this.api.solids();
    const viewsBySolid = new Map<number, ViewInfo[]>();
    for (const solid of solids) {
      viewsBySolid.set(solid.solid_id, await this.api.views(solid.solid_id));
    }
    const summary = reviewSummary(solids, viewsBySolid, this.state.roster);
    const panel = el<HTMLDivElement>("review");
    panel.hidden = false;
    const rows = summary.solids
      .map((row) => {
        const flags: string[] = [];
        if (row.flagged_for_removal) flags.push("will be removed entirely");
        if (row.unvoted_views.length > 0) flags.push(`${row.unvoted_views.length} unvoted`);
        return (
          `<tr class="${row.flagged_for_removal ? "flagged" : ""}">` +
          `<td>solid ${row.solid_id}</td><td>${row.kept_count} kept</td>` +
          `<td>${row.discarded_count} discarded</td><td>${flags.join(", ")}</td></tr>`
        );
      })
      .join("");
    el<HTMLTableSectionElement>("review-rows").innerHTML = rows;
    const exportButton = el<HTMLButtonElement>("do-export");
    exportButton.disabled = !summary.export_enabled;
    el<HTMLDivElement>("review-status").textContent = summary.export_enabled
      ? "all views voted; export is enabled"
      : `${summary.unvoted_total} views still lack votes; export disabled`;
  }

  private async runExport(): Promise<void> {
    try {
      const exported = await this.api.export();
      const kept = Object.values(exported).reduce((n, split) => n + split.samples.length, 0);
      this.showBanner(`export ok: ${kept} views kept across splits`, false);
    } catch (err) {
      this.showBanner(`export refused: ${describe(err)}`, true);
    }
  }
}

function describe(err: unknown): string {
  if (err instanceof ApiError) return `${err.message} (HTTP ${err.status})`;
  return err instanceof Error ? err.message : String(err);
}
